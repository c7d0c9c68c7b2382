// Batch runner: rwre_lab --config <path> [--seed u64] [--workers n] [--out dir] [--format csv|json]
// Exit codes: 0 all verdicts pass, 2 some verdict fails, 1 execution error.

#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rwre/rwre.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random walk in dynamic random environment: experiment runner"};
  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir;
  std::string format;
  app.add_option("--config", config_path, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "override [run] seed");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* format_opt = app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    std::ifstream in(config_path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    rwre::ExperimentConfig cfg = rwre::parse_config(buf.str());
    if (*seed_opt) cfg.seed = seed;
    if (*workers_opt) cfg.workers = workers;
    if (*out_opt) cfg.out_dir = out_dir;
    if (*format_opt) cfg.format = format;

    const auto t0 = std::chrono::steady_clock::now();
    const rwre::ExperimentReport report = rwre::run(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto files = rwre::emit(report, cfg.format, cfg.out_dir);

    for (const auto& v : report.verdicts) {
      std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << "  observed=" << rwre::format_number(v.observed)
                << "  threshold: " << v.threshold;
      if (!v.detail.empty()) std::cout << "  (" << v.detail << ")";
      std::cout << "\n";
    }
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    std::cerr << "wall-clock " << seconds << " s, workers " << cfg.workers << "\n";
    return report.all_passed() ? 0 : 2;
  } catch (const rwre::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
