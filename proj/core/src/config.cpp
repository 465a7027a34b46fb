#include "ncerg/config.hpp"

#include <set>

#include "ncerg/ergodic.hpp"
#include "ncerg/rng.hpp"
#include "ncerg/serialize.hpp"
#include "ncerg/toml.hpp"

namespace ncerg {

using nlohmann::json;

NormId norm_id_from_name(const std::string& name) {
  if (name == "L1") return NormId::l1();
  if (name == "Linf") return NormId::linf();
  if (name == "L1capLinf") return NormId::l1_cap_linf();
  if (name == "L1plusLinf") return NormId::l1_plus_linf();
  if (name == "Orlicz:p1") return NormId::orlicz(OrliczFunction::power(1.0));
  if (name == "Orlicz:p2") return NormId::orlicz(OrliczFunction::power(2.0));
  if (name == "Orlicz:p4") return NormId::orlicz(OrliczFunction::power(4.0));
  if (name == "Orlicz:expm1") return NormId::orlicz(OrliczFunction::exp_minus_one());
  throw InvalidArgument("unknown norm name '" + name + "'");
}

namespace {

const std::set<std::string> kKernelTypes = {
    "identity", "unitary_mixture", "pinching", "markov", "schur", "compose", "convex"};
const std::set<std::string> kElementKinds = {"general", "hermitian", "psd",
                                             "projection", "explicit"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const json doc = parse_toml(text);  // TomlError carries line/col
  std::vector<std::string> problems;
  ExperimentConfig cfg;
  cfg.schedule = dyadic_schedule(14);

  if (doc.contains("id")) {
    if (doc["id"].is_string())
      cfg.id = doc["id"].get<std::string>();
    else
      problems.push_back("id: must be a string");
  }

  if (!doc.contains("seed")) {
    problems.push_back("seed: required");
  } else if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) {
    problems.push_back("seed: must be a nonnegative integer");
  } else {
    cfg.seed = doc["seed"].get<uint64_t>();
  }

  if (!doc.contains("shape") || !doc["shape"].is_object() ||
      !doc["shape"].contains("blocks")) {
    problems.push_back("shape.blocks: required");
  } else {
    try {
      cfg.shape = shape_from_json(doc["shape"]["blocks"]);
    } catch (const Error& e) {
      problems.push_back(std::string("shape.blocks: ") + e.what());
    }
  }

  if (doc.contains("kernel")) {
    if (!doc["kernel"].is_object() || !doc["kernel"].contains("type") ||
        !doc["kernel"]["type"].is_string()) {
      problems.push_back("kernel: must be a table with a string 'type'");
    } else {
      const std::string type = doc["kernel"]["type"].get<std::string>();
      if (!kKernelTypes.count(type))
        problems.push_back("kernel.type: unknown type '" + type + "'");
      else
        cfg.kernel = doc["kernel"];
    }
  }

  if (doc.contains("element")) {
    if (!doc["element"].is_object()) {
      problems.push_back("element: must be a table");
    } else {
      const std::string kind = doc["element"].value("kind", "hermitian");
      if (!kElementKinds.count(kind))
        problems.push_back("element.kind: unknown kind '" + kind + "'");
      else
        cfg.element = doc["element"];
      if (kind == "explicit" &&
          (!doc["element"].contains("json") || !doc["element"]["json"].is_string()))
        problems.push_back("element.json: required for explicit elements");
    }
  }

  if (doc.contains("norms")) {
    if (!doc["norms"].is_array()) {
      problems.push_back("norms: must be an array of names");
    } else {
      cfg.norms.clear();
      for (const auto& n : doc["norms"]) {
        if (!n.is_string()) {
          problems.push_back("norms: entries must be strings");
          continue;
        }
        const std::string name = n.get<std::string>();
        try {
          norm_id_from_name(name);
          cfg.norms.push_back(name);
        } catch (const Error&) {
          problems.push_back("norms: unknown norm '" + name + "'");
        }
      }
      if (cfg.norms.empty()) problems.push_back("norms: at least one norm required");
    }
  }

  if (doc.contains("schedule")) {
    if (!doc["schedule"].is_array() || doc["schedule"].empty()) {
      problems.push_back("schedule: must be a nonempty array of integers");
    } else {
      std::vector<long long> sched;
      bool ok = true;
      for (const auto& v : doc["schedule"]) {
        if (!v.is_number_integer()) {
          problems.push_back("schedule: entries must be integers");
          ok = false;
          break;
        }
        sched.push_back(v.get<long long>());
      }
      if (ok) {
        for (size_t i = 0; i < sched.size(); ++i) {
          if (sched[i] < 1 || (i > 0 && sched[i] <= sched[i - 1])) {
            problems.push_back("schedule: must be strictly increasing and >= 1");
            ok = false;
            break;
          }
        }
      }
      if (ok) cfg.schedule = std::move(sched);
    }
  }

  const json budgets = doc.value("budgets", json::object());
  const auto positive = [&](const char* key, auto& slot, bool integer) {
    if (!budgets.contains(key)) return;
    const json& v = budgets[key];
    if (integer) {
      if (!v.is_number_integer() || v.get<long long>() < 1) {
        problems.push_back(std::string("budgets.") + key + ": must be a positive integer");
        return;
      }
    } else if (!v.is_number() || !(v.get<double>() > 0.0)) {
      problems.push_back(std::string("budgets.") + key + ": must be positive");
      return;
    }
    slot = v.get<std::decay_t<decltype(slot)>>();
  };
  positive("n_max", cfg.n_max, true);
  positive("epsilon", cfg.epsilon, false);
  positive("bound", cfg.bound, false);
  positive("tol", cfg.tol, false);
  positive("trials", cfg.trials, true);

  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

std::string ExperimentConfig::to_toml() const {
  json doc;
  doc["id"] = id;
  doc["seed"] = seed;
  doc["norms"] = norms;
  doc["schedule"] = schedule;
  doc["shape"] = json{{"blocks", shape_to_json(shape)}};
  doc["kernel"] = kernel;
  doc["element"] = element;
  doc["budgets"] = json{{"n_max", n_max}, {"epsilon", epsilon}, {"bound", bound},
                        {"tol", tol},     {"trials", trials}};
  return emit_toml(doc);
}

Operator build_element(const ExperimentConfig& config, uint64_t effective_seed) {
  const std::string kind = config.element.value("kind", "hermitian");
  const uint64_t eseed = config.element.contains("seed")
                             ? config.element["seed"].get<uint64_t>()
                             : mix_seed(effective_seed, "element");
  if (kind == "explicit") {
    const Operator x =
        operator_from_json(json::parse(config.element.at("json").get<std::string>()));
    if (x.shape() != config.shape)
      throw InvalidArgument("element: explicit operator shape does not match config");
    return x;
  }
  if (kind == "general")
    return random_operator(config.shape, RandomKind::general, eseed);
  if (kind == "hermitian")
    return random_operator(config.shape, RandomKind::hermitian, eseed);
  if (kind == "psd") return random_operator(config.shape, RandomKind::psd, eseed);
  if (kind == "projection")
    return random_operator(config.shape, RandomKind::projection, eseed,
                           config.element.value("rank", 1));
  throw InvalidArgument("element: unknown kind '" + kind + "'");
}

}  // namespace ncerg
