// ncerg command-line runner: executes one experiment command on a TOML config
// and emits CSV or JSON result rows.
//
// Exit codes: 0 success, 1 any fail verdict under --strict, 2 usage/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ncerg/runner.hpp"
#include "ncerg/toml.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ncerg::Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ncerg::Error("cannot write '" + path + "'");
  out << data;
  if (!out) throw ncerg::Error("write failed for '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for kernel ergodic averages on weighted "
               "matrix algebras"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::string dump_dir;
  std::optional<uint64_t> seed_flag;
  bool strict = false;

  app.add_option("--config", config_path, "TOML experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed_flag, "seed override (beats NCERG_SEED and config)");
  app.add_option("--out", out_path, "output path (default: stdout)");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--strict", strict, "exit 1 when any row has a fail verdict");
  app.add_option("--dump", dump_dir, "directory for intermediate artifacts");

  for (const char* name :
       {"certify", "norms", "cesaro", "dsae", "prop1", "theorem", "embed"})
    app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const ncerg::ExperimentConfig config = ncerg::parse_config(read_file(config_path));
    const auto command =
        ncerg::command_from_string(app.get_subcommands().front()->get_name());

    uint64_t seed = config.seed;
    if (const char* env = std::getenv("NCERG_SEED")) seed = std::stoull(env);
    if (seed_flag) seed = *seed_flag;

    const ncerg::RunOutput out =
        ncerg::run(config, *command, seed, !dump_dir.empty());

    const std::string rendered =
        format == "csv" ? ncerg::emit_csv(out.rows) : ncerg::emit_rows_json(out.rows);
    if (out_path.empty())
      std::cout << rendered;
    else
      write_file(out_path, rendered);

    if (!dump_dir.empty()) {
      std::filesystem::create_directories(dump_dir);
      for (const auto& [name, doc] : out.artifacts)
        write_file((std::filesystem::path(dump_dir) / name).string(), doc.dump(2) + "\n");
    }

    return (strict && out.any_fail) ? 1 : 0;
  } catch (const ncerg::TomlError& e) {
    std::cerr << "config syntax error: " << e.what() << "\n";
    return 2;
  } catch (const ncerg::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
