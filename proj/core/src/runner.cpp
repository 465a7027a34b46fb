#include "ncerg/runner.hpp"

#include <charconv>
#include <cmath>

#include "ncerg/ergodic.hpp"
#include "ncerg/error.hpp"
#include "ncerg/rng.hpp"
#include "ncerg/serialize.hpp"

namespace ncerg {

using nlohmann::json;

std::optional<Command> command_from_string(std::string_view name) {
  if (name == "certify") return Command::certify;
  if (name == "norms") return Command::norms;
  if (name == "cesaro") return Command::cesaro;
  if (name == "dsae") return Command::dsae;
  if (name == "prop1") return Command::prop1;
  if (name == "theorem") return Command::theorem;
  if (name == "embed") return Command::embed;
  return std::nullopt;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::certify: return "certify";
    case Command::norms: return "norms";
    case Command::cesaro: return "cesaro";
    case Command::dsae: return "dsae";
    case Command::prop1: return "prop1";
    case Command::theorem: return "theorem";
    case Command::embed: return "embed";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double clamp_finite(double v) {
  if (std::isnan(v)) return 0.0;
  if (std::isinf(v)) return v > 0 ? 1e300 : -1e300;
  return v;
}

struct RowSink {
  std::vector<ResultRow>& rows;
  std::string experiment;
  std::string command;

  void operator()(long long level, std::string metric, double value,
                  std::string verdict) const {
    rows.push_back(ResultRow{experiment, command, level, std::move(metric),
                             clamp_finite(value), std::move(verdict)});
  }
};

const char* pf(bool pass) { return pass ? "pass" : "fail"; }

void run_certify(const ExperimentConfig& cfg, const KernelRep& kernel,
                 const RowSink& row, RunOutput& out, bool artifacts) {
  const Certification cert = certify_ds(kernel);
  row(0, "choi_min_eig", cert.choi_min_eig, pf(cert.choi_min_eig >= -1e-9));
  row(0, "unital_defect", cert.unital_defect, pf(cert.unital_defect <= 1e-9));
  row(0, "subtrace_defect", cert.subtrace_defect, pf(cert.subtrace_defect <= 1e-9));
  row(0, "l2_opnorm", cert.l2_opnorm, pf(cert.l2_opnorm <= 1.0 + 1e-8));
  row(0, "certified", cert.pass ? 1.0 : 0.0, pf(cert.pass));
  if (artifacts) {
    out.artifacts["kernel.json"] = kernel_to_json(kernel);
    out.artifacts["certification.json"] = certification_to_json(cert);
  }
}

void run_norms(const ExperimentConfig& cfg, uint64_t seed, const RowSink& row,
               RunOutput& out, bool artifacts) {
  for (int t = 0; t < cfg.trials; ++t) {
    const Operator x = build_element(cfg, mix_seed(seed, "trial" + std::to_string(t)));
    const StepFunction m = mu(x);
    for (const auto& name : cfg.norms)
      row(t, "norm:" + name, norm_from_mu(norm_id_from_name(name), m), "n/a");
    if (artifacts && t < 8) {
      out.artifacts["element_" + std::to_string(t) + ".json"] = operator_to_json(x);
      out.artifacts["mu_" + std::to_string(t) + ".json"] = step_function_to_json(m);
    }
  }
  for (const auto& name : cfg.norms) {
    const NormAxiomReport rep = norm_axiom_suite(
        norm_id_from_name(name), cfg.shape, mix_seed(seed, "axioms"),
        std::min(cfg.trials, 25));
    for (const auto& ax : rep.axioms)
      row(0, "axiom:" + name + ":" + ax.axiom, ax.worst_violation, pf(ax.pass));
  }
}

void run_cesaro(const ExperimentConfig& cfg, const CertifiedKernel& ck, uint64_t seed,
                const RowSink& row, RunOutput& out, bool artifacts) {
  const Operator x = build_element(cfg, seed);
  const Trajectory traj = cesaro(ck, x, cfg.schedule);
  for (const auto& name : cfg.norms) {
    const CauchyProfile prof = cauchy_profile(traj, norm_id_from_name(name));
    for (size_t i = 0; i < traj.ns.size(); ++i) {
      row(traj.ns[i], "dist_to_limit:" + name, prof.against_limit[i], "n/a");
      row(traj.ns[i], "tail_envelope:" + name, prof.tail_envelope[i], "n/a");
    }
    bool monotone = true;
    for (size_t i = 1; i < prof.tail_envelope.size(); ++i)
      monotone = monotone && prof.tail_envelope[i] <= prof.tail_envelope[i - 1] + 1e-12;
    row(0, "envelope_nonincreasing:" + name, monotone ? 1.0 : 0.0, pf(monotone));
    if (artifacts)
      out.artifacts["limit_" + name + ".json"] = operator_to_json(prof.limit);
  }
  if (artifacts) {
    out.artifacts["element.json"] = operator_to_json(x);
    out.artifacts["trajectory.json"] = trajectory_to_json(traj, true);
  }
}

void run_dsae(const ExperimentConfig& cfg, const CertifiedKernel& ck, uint64_t seed,
              const RowSink& row, RunOutput& out, bool artifacts) {
  const Operator x = build_element(cfg, seed);
  const Trajectory traj = cesaro(ck, x, cfg.schedule);
  const Operator limit = mean_limit(ck, x);
  const ProjectionWitness w = dsae_check(traj.averages, limit, cfg.epsilon, cfg.bound);
  for (size_t i = 0; i < traj.ns.size(); ++i)
    row(traj.ns[i], "uniform_norm", w.uniform_norms[i], "n/a");
  row(0, "defect", w.defect, pf(w.defect < cfg.epsilon));
  row(0, "achieved_bound", w.achieved_bound, pf(w.achieved_bound <= cfg.bound));
  row(0, "lambda_used", w.lambda_used, "n/a");
  row(0, "witness_valid", w.valid ? 1.0 : 0.0, pf(w.valid));
  if (artifacts) {
    out.artifacts["element.json"] = operator_to_json(x);
    out.artifacts["limit.json"] = operator_to_json(limit);
    out.artifacts["trajectory.json"] = trajectory_to_json(traj, true);
    out.artifacts["witness.json"] = witness_to_json(w, true);
  }
}

void run_prop1(const ExperimentConfig& cfg, const CertifiedKernel& ck, uint64_t seed,
               const RowSink& row, RunOutput& out, bool artifacts) {
  const Operator x = build_element(cfg, seed);
  const Prop1Report rep = replicate_prop1(ck, x, cfg.n_max, cfg.tol, cfg.schedule);
  for (const auto& lev : rep.levels) {
    row(lev.n, "inf_budget", lev.inf_budget, "n/a");
    row(lev.n, "x2_inf", lev.x2_inf, pf(lev.x2_inf < lev.inf_budget));
    row(lev.n, "l_of_n", double(lev.l_of_n), pf(lev.l_of_n >= 1));
    row(lev.n, "max_pair_r0", lev.max_pair_r0,
        pf(lev.max_pair_r0 <= lev.bound + cfg.tol));
    row(lev.n, "bound", lev.bound, "n/a");
    row(lev.n, "level_pass", lev.pass ? 1.0 : 0.0, pf(lev.pass));
  }
  if (!rep.failure.empty()) row(0, "spectral_gap", rep.spectral_gap, "n/a");
  if (artifacts) {
    out.artifacts["element.json"] = operator_to_json(x);
    out.artifacts["prop1_report.json"] = prop1_report_to_json(rep, true);
  }
}

void run_theorem(const ExperimentConfig& cfg, const CertifiedKernel& ck, uint64_t seed,
                 const RowSink& row, RunOutput& out, bool artifacts) {
  const Operator x = build_element(cfg, seed);
  TheoremReport rep;
  try {
    rep = replicate_theorem(ck, x, cfg.n_max, cfg.tol, cfg.schedule);
  } catch (const InvalidArgument& e) {
    // Infeasible trace budget is a structured failure, not a crash.
    row(0, "infeasible_trace_budget", cfg.shape.total_trace(), "fail");
    out.artifacts["failure.json"] = json{{"error", e.what()}};
    return;
  }
  for (const auto& lev : rep.levels) {
    row(lev.n, "inf_budget", lev.inf_budget, "n/a");
    row(lev.n, "x2_inf", lev.x2_inf, pf(lev.x2_inf < lev.inf_budget));
    row(lev.n, "x12_l1_budget", lev.l1_budget, "n/a");
    row(lev.n, "x12_l1", lev.x12_l1, pf(lev.x12_l1 < lev.l1_budget));
    for (const auto& sh : lev.shells)
      row(lev.n, "shell_" + std::to_string(sh.k) + "_l1", sh.l1,
          pf(sh.l1 < sh.l1_budget));
    row(lev.n, "defect_budget", lev.defect_budget, "n/a");
    row(lev.n, "defect", lev.defect, pf(lev.defect < lev.defect_budget));
    row(lev.n, "l_of_n", double(lev.l_of_n), pf(lev.l_of_n >= 1));
    row(lev.n, "max_pair_uniform", lev.max_pair_unif,
        pf(lev.max_pair_unif <= lev.final_bound + cfg.tol));
    row(lev.n, "final_bound", lev.final_bound, "n/a");
    row(lev.n, "norm_limit_residual", lev.norm_limit_residual, "n/a");
    row(lev.n, "level_pass", lev.pass ? 1.0 : 0.0, pf(lev.pass));
  }
  if (artifacts) {
    out.artifacts["element.json"] = operator_to_json(x);
    out.artifacts["theorem_report.json"] = theorem_report_to_json(rep, true);
  }
}

void run_embed(const ExperimentConfig& cfg, uint64_t seed, const RowSink& row) {
  for (const auto& name : cfg.norms) {
    const EmbeddingReport rep = embedding_probe(norm_id_from_name(name), cfg.shape,
                                                mix_seed(seed, "embed"), cfg.trials);
    row(0, "c_upper:" + name, rep.c_upper, "n/a");
    row(0, "c_lower:" + name, rep.c_lower, "n/a");
    row(0, "samples:" + name, double(rep.samples), "n/a");
  }
}

}  // namespace

RunOutput run(const ExperimentConfig& config, Command command, uint64_t effective_seed,
              bool include_artifacts) {
  RunOutput out;
  const RowSink row{out.rows, config.id, command_name(command)};

  if (include_artifacts)
    out.artifacts["config.json"] = json{{"toml", config.to_toml()},
                                        {"effective_seed", effective_seed}};

  switch (command) {
    case Command::norms:
      run_norms(config, effective_seed, row, out, include_artifacts);
      break;
    case Command::embed:
      run_embed(config, effective_seed, row);
      break;
    case Command::certify: {
      const KernelRep kernel = kernel_from_recipe(config.shape, config.kernel);
      run_certify(config, kernel, row, out, include_artifacts);
      break;
    }
    default: {
      const KernelRep kernel = kernel_from_recipe(config.shape, config.kernel);
      const CertifiedKernel ck = certify_or_throw(kernel);
      if (command == Command::cesaro)
        run_cesaro(config, ck, effective_seed, row, out, include_artifacts);
      else if (command == Command::dsae)
        run_dsae(config, ck, effective_seed, row, out, include_artifacts);
      else if (command == Command::prop1)
        run_prop1(config, ck, effective_seed, row, out, include_artifacts);
      else
        run_theorem(config, ck, effective_seed, row, out, include_artifacts);
      break;
    }
  }

  for (const auto& r : out.rows) out.any_fail = out.any_fail || r.verdict == "fail";
  return out;
}

// ---------------------------------------------------------------------------
// Emission and parsing
// ---------------------------------------------------------------------------

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string emit_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,command,level,metric,value,verdict\n";
  for (const auto& r : rows) {
    out += csv_quote(r.experiment) + "," + csv_quote(r.command) + "," +
           std::to_string(r.level) + "," + csv_quote(r.metric) + "," +
           format_double(r.value) + "," + csv_quote(r.verdict) + "\n";
  }
  return out;
}

std::string emit_rows_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"experiment", r.experiment},
                       {"command", r.command},
                       {"level", r.level},
                       {"metric", r.metric},
                       {"value", r.value},
                       {"verdict", r.verdict}});
  return arr.dump(2) + "\n";
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      field.clear();
      if (!(fields.size() == 1 && fields[0].empty())) records.push_back(fields);
      fields.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!field.empty() || !fields.empty()) {
    fields.push_back(std::move(field));
    records.push_back(fields);
  }
  if (records.empty()) throw InvalidArgument("csv: missing header");
  const std::vector<std::string> header = {"experiment", "command", "level",
                                           "metric",     "value",   "verdict"};
  if (records.front() != header) throw InvalidArgument("csv: unexpected header");
  std::vector<ResultRow> rows;
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 6)
      throw InvalidArgument("csv: record " + std::to_string(i) + " has " +
                            std::to_string(rec.size()) + " fields");
    ResultRow r;
    r.experiment = rec[0];
    r.command = rec[1];
    r.level = std::stoll(rec[2]);
    r.metric = rec[3];
    r.value = std::stod(rec[4]);
    r.verdict = rec[5];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> parse_rows_json(const std::string& text) {
  const json arr = json::parse(text);
  if (!arr.is_array()) throw InvalidArgument("rows json: expected an array");
  std::vector<ResultRow> rows;
  for (const auto& j : arr) {
    ResultRow r;
    r.experiment = j.at("experiment").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.level = j.at("level").get<long long>();
    r.metric = j.at("metric").get<std::string>();
    r.value = j.at("value").get<double>();
    r.verdict = j.at("verdict").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ncerg
