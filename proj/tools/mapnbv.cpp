// mapnbv: run episodes and suites from a config file, reproduce the published
// comparison tables, and write out the bundled procedural scenes.
//
// Exit codes: 0 success, 1 runtime failure, 2 config or usage error,
// 3 when every episode ended with planner_stuck.

#include <cstdio>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "mapnbv/mapnbv.hpp"

namespace {

using namespace mapnbv;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kStuck = 3;

int cmd_run(const fs::path& config, const fs::path& out, std::optional<std::uint64_t> seed) {
  const auto rc = io::load_run_config(config);
  const auto r = io::run_single(rc, out, seed);
  std::cout << r.settings.scene << ' ' << r.settings.planner << " n=" << r.settings.team_size << ": "
            << to_string(r.termination) << " after " << r.steps() << " steps, " << r.points.back() << " points, "
            << io::fmt(io::team_distance(r.distance.back())) << " m flown\n";
  if (!r.message.empty()) std::cout << "  " << r.message << '\n';
  return r.termination == Termination::planner_stuck ? kStuck : kOk;
}

int cmd_suite(const fs::path& config, const fs::path& out) {
  const auto rc = io::load_run_config(config);
  const auto outcome = io::run_configured_suite(rc, out, &std::cout);
  std::cout << outcome.rows.size() << " cells, results in " << out.string() << '\n';
  if (outcome.any_error()) return kFailure;
  return outcome.all_stuck() ? kStuck : kOk;
}

int cmd_tables() {
  for (const auto& t : io::reproduce_tables()) {
    std::cout << t.name << '\n';
    std::cout << std::left << std::setw(12) << "class" << std::setw(12) << "model" << std::right << std::setw(8) << "a"
              << std::setw(8) << "b" << std::setw(10) << "improv" << std::setw(10) << "printed" << '\n';
    for (const auto& r : t.rows) {
      char line[128];
      std::snprintf(line, sizeof line, "%-12s%-12s%8.0f%8.0f%9.2f%%%9.2f%%", r.label.c_str(), r.model.c_str(),
                    r.points_a, r.points_b, r.improvement_percent, r.printed_percent);
      std::cout << line << '\n';
    }
    char tail[96];
    std::snprintf(tail, sizeof tail, "mean %.2f%%, largest cell deviation %.2f", t.mean_percent, t.max_cell_error);
    std::cout << tail << "\n\n";
  }
  return kOk;
}

int cmd_gen_scenes(const fs::path& out) {
  fs::create_directories(out);
  std::string toml = "# Bundled procedural scenes as mesh files.\nseed = 1\n\n[scenes]\npaths = [\n";
  for (const auto& m : procedural::bundled_scenes()) {
    io::write_obj(out / (m.name + ".obj"), m.mesh);
    toml += "  \"" + m.name + ".obj\",\n";
    std::cout << m.name << ".obj (" << m.label << ", " << m.mesh.size() << " triangles)\n";
  }
  toml += "]\n\n[suite]\nplanners = [\"map_nbv\", \"pred_nbv\", \"frontier_multi\"]\nteam_sizes = [2]\n";
  io::write_text(out / "scenes.toml", toml);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent prediction-guided next-best-view simulator"};
  app.require_subcommand(1);

  fs::path config, out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run one episode on the first configured scene");
  run->add_option("--config", config, "TOML or JSON run configuration")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--seed", seed, "Override the configured seed");

  auto* suite = app.add_subcommand("suite", "Run the configured comparison matrix");
  suite->add_option("--config", config, "TOML or JSON run configuration")->required();
  suite->add_option("--out", out, "Output directory")->required();

  app.add_subcommand("tables", "Recompute the improvement columns of the bundled comparison tables");

  auto* gen = app.add_subcommand("gen-scenes", "Write the bundled procedural scenes as OBJ files");
  gen->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config, out, seed);
    if (suite->parsed()) return cmd_suite(config, out);
    if (gen->parsed()) return cmd_gen_scenes(out);
    return cmd_tables();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
