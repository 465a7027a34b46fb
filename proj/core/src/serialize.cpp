#include "ncerg/serialize.hpp"

#include "ncerg/error.hpp"

namespace ncerg {

using nlohmann::json;

json shape_to_json(const AlgebraShape& shape) {
  json j = json::array();
  for (const auto& b : shape.blocks()) j.push_back(json::array({b.dim, b.weight}));
  return j;
}

AlgebraShape shape_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("shape json: expected array");
  std::vector<Block> blocks;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw InvalidArgument("shape json: expected [dim, weight] pairs");
    blocks.push_back(Block{e[0].get<int>(), e[1].get<double>()});
  }
  return AlgebraShape(std::move(blocks));
}

json operator_to_json(const Operator& x) {
  json blocks = json::array();
  for (int k = 0; k < x.block_count(); ++k) {
    const CMat& b = x.block(k);
    json rows = json::array();
    for (int i = 0; i < b.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < b.cols(); ++j)
        row.push_back(json::array({b(i, j).real(), b(i, j).imag()}));
      rows.push_back(std::move(row));
    }
    blocks.push_back(std::move(rows));
  }
  return json{{"shape", shape_to_json(x.shape())}, {"blocks", std::move(blocks)}};
}

Operator operator_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("blocks"))
    throw InvalidArgument("operator json: expected {shape, blocks}");
  AlgebraShape shape = shape_from_json(j.at("shape"));
  const json& jb = j.at("blocks");
  if (!jb.is_array() || int(jb.size()) != shape.block_count())
    throw InvalidArgument("operator json: block count mismatch");
  std::vector<CMat> blocks;
  for (int k = 0; k < shape.block_count(); ++k) {
    const int d = shape.block(k).dim;
    const json& rows = jb[k];
    if (!rows.is_array() || int(rows.size()) != d)
      throw InvalidArgument("operator json: bad row count in block " + std::to_string(k));
    CMat m(d, d);
    for (int i = 0; i < d; ++i) {
      if (!rows[i].is_array() || int(rows[i].size()) != d)
        throw InvalidArgument("operator json: bad column count in block " +
                              std::to_string(k));
      for (int c = 0; c < d; ++c) {
        const json& cell = rows[i][c];
        if (!cell.is_array() || cell.size() != 2)
          throw InvalidArgument("operator json: entries must be [re, im]");
        m(i, c) = cplx(cell[0].get<double>(), cell[1].get<double>());
      }
    }
    blocks.push_back(std::move(m));
  }
  return Operator(std::move(shape), std::move(blocks));
}

json step_function_to_json(const StepFunction& f) {
  json j = json::array();
  for (const auto& s : f.steps()) j.push_back(json::array({s.value, s.mass}));
  return j;
}

StepFunction step_function_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("step function json: expected array");
  std::vector<std::pair<double, double>> atoms;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw InvalidArgument("step function json: expected [value, mass] pairs");
    atoms.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return StepFunction::from_atoms(std::move(atoms));
}

json kernel_to_json(const KernelRep& kernel) {
  if (kernel.recipe().value("type", "raw") == "raw")
    throw InvalidArgument("kernel json: raw kernels have no re-expandable recipe");
  return json{{"shape", shape_to_json(kernel.shape())}, {"recipe", kernel.recipe()}};
}

KernelRep kernel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("recipe"))
    throw InvalidArgument("kernel json: expected {shape, recipe}");
  return kernel_from_recipe(shape_from_json(j.at("shape")), j.at("recipe"));
}

json certification_to_json(const Certification& cert) {
  return json{{"choi_min_eig", cert.choi_min_eig},
              {"unital_defect", cert.unital_defect},
              {"subtrace_defect", cert.subtrace_defect},
              {"l2_opnorm", cert.l2_opnorm},
              {"pass", cert.pass}};
}

json witness_to_json(const ProjectionWitness& w, bool include_operators) {
  json j{{"defect", w.defect},
         {"uniform_norms", w.uniform_norms},
         {"apriori_bounds", w.apriori_bounds},
         {"achieved_bound", w.achieved_bound},
         {"budget_epsilon", w.budget_epsilon},
         {"requested_bound", w.requested_bound},
         {"lambda_used", w.lambda_used},
         {"chebyshev_estimate", w.chebyshev_estimate},
         {"valid", w.valid},
         {"failure", w.failure}};
  if (include_operators) j["projection"] = operator_to_json(w.e.op());
  return j;
}

json trajectory_to_json(const Trajectory& t, bool include_operators) {
  json j{{"ns", t.ns}};
  if (include_operators) {
    j["seed_element"] = operator_to_json(t.seed);
    json avgs = json::array();
    for (const auto& a : t.averages) avgs.push_back(operator_to_json(a));
    j["averages"] = std::move(avgs);
  }
  return j;
}

json prop1_report_to_json(const Prop1Report& rep, bool include_operators) {
  json levels = json::array();
  for (const auto& lev : rep.levels) {
    json j{{"n", lev.n},
           {"inf_budget", lev.inf_budget},
           {"cut_level", lev.cut_level},
           {"x2_inf", lev.x2_inf},
           {"x1_l1", lev.x1_l1},
           {"l_of_n", lev.l_of_n},
           {"cauchy_threshold", lev.cauchy_threshold},
           {"max_tail_l1", lev.max_tail_l1},
           {"max_pair_r0", lev.max_pair_r0},
           {"bound", lev.bound},
           {"pass", lev.pass},
           {"failure", lev.failure}};
    if (include_operators) {
      j["x1"] = operator_to_json(lev.x1);
      j["x2"] = operator_to_json(lev.x2);
    }
    levels.push_back(std::move(j));
  }
  return json{{"levels", std::move(levels)},
              {"schedule", rep.schedule},
              {"trajectory", trajectory_to_json(rep.x_traj, include_operators)},
              {"all_pass", rep.all_pass},
              {"spectral_gap", rep.spectral_gap},
              {"failure", rep.failure}};
}

json theorem_report_to_json(const TheoremReport& rep, bool include_operators) {
  json levels = json::array();
  for (const auto& lev : rep.levels) {
    json shells = json::array();
    for (const auto& sh : lev.shells) {
      json js{{"k", sh.k}, {"l1_budget", sh.l1_budget}, {"l1", sh.l1}};
      if (include_operators) js["op"] = operator_to_json(sh.op);
      shells.push_back(std::move(js));
    }
    json j{{"n", lev.n},
           {"inf_budget", lev.inf_budget},
           {"x2_inf", lev.x2_inf},
           {"l1_budget", lev.l1_budget},
           {"x12_l1", lev.x12_l1},
           {"shells", std::move(shells)},
           {"en_defect", lev.en_defect},
           {"e1n_defect", lev.e1n_defect},
           {"defect_budget", lev.defect_budget},
           {"defect", lev.defect},
           {"l_of_n", lev.l_of_n},
           {"max_pair_unif", lev.max_pair_unif},
           {"final_bound", lev.final_bound},
           {"norm_limit_residual", lev.norm_limit_residual},
           {"pass", lev.pass},
           {"failure", lev.failure}};
    if (include_operators) {
      j["x1"] = operator_to_json(lev.x1);
      j["x2"] = operator_to_json(lev.x2);
      j["x11"] = operator_to_json(lev.x11);
      j["x12"] = operator_to_json(lev.x12);
      j["en"] = operator_to_json(lev.en.op());
      j["e1n"] = operator_to_json(lev.e1n.op());
      j["e2n"] = operator_to_json(lev.e2n.op());
    }
    levels.push_back(std::move(j));
  }
  return json{{"levels", std::move(levels)},
              {"schedule", rep.schedule},
              {"trajectory", trajectory_to_json(rep.x_traj, include_operators)},
              {"all_pass", rep.all_pass},
              {"failure", rep.failure}};
}

}  // namespace ncerg
