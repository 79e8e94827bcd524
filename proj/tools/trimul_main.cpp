// trimul_main.cpp
//
// Command line driver. Exit codes: 0 success, 1 self-test failures,
// 2 usage error, 3 refused computation, 4 i/o failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trimul/serialize.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double q = 0.0;
  int j_max = 0;
  int grid = 0;
  int family_order = 0;
  int trials = 0;
  int partition_size = 0;
  long long L_max = 0;
  std::string multiplier;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file");
  sub->add_option("--out", f.out_dir, "output directory");
  sub->add_option("--seed", f.seed, "base random seed");
}

// Applies a flag override only when the flag was given on this
// subcommand, so config-file values survive otherwise.
template <typename Fn>
void if_set(CLI::App* sub, const char* name, Fn apply) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  if (opt != nullptr && opt->count() > 0) apply();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale experiments for trilinear Fourier multipliers"};
  app.set_version_flag("--version", std::string("trimul 0.1.0"));
  app.require_subcommand(1);

  Flags f;

  CLI::App* analyze =
      app.add_subcommand("analyze", "wavelet analysis of a sampled multiplier");
  add_common(analyze, f);
  analyze->add_option("--q", f.q, "Lebesgue exponent")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--jmax", f.j_max, "finest analysis scale")
      ->check(CLI::Range(1, 12));
  analyze->add_option("--grid", f.grid, "samples per axis")
      ->check(CLI::Range(4, 1024));
  analyze->add_option("--family-order", f.family_order, "wavelet family order")
      ->check(CLI::Range(1, 8));
  analyze
      ->add_option("--multiplier", f.multiplier, "zero|gaussian|sine-poly")
      ->check(CLI::IsMember({"zero", "gaussian", "sine-poly"}));

  CLI::App* partition =
      app.add_subcommand("partition", "certified level-set partition demo");
  add_common(partition, f);
  partition->add_option("--q", f.q, "Lebesgue exponent")
      ->check(CLI::PositiveNumber);
  partition->add_option("--size", f.partition_size, "synthetic entry count")
      ->check(CLI::Range(1, 2000000));

  CLI::App* sweep =
      app.add_subcommand("bound-sweep", "operator norm versus envelope sweep");
  add_common(sweep, f);
  sweep->add_option("--q", f.q, "Lebesgue exponent")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--grid", f.grid, "samples per axis")
      ->check(CLI::Range(4, 1024));
  sweep->add_option("--trials", f.trials, "random starts per member")
      ->check(CLI::Range(1, 4096));

  CLI::App* necessity =
      app.add_subcommand("necessity", "lacunary growth experiment");
  add_common(necessity, f);
  necessity->add_option("--trials", f.trials, "sign draws per block, x32")
      ->check(CLI::Range(1, 4096));

  CLI::App* boundary =
      app.add_subcommand("boundary", "partial sums at the exponent boundary");
  add_common(boundary, f);
  boundary->add_option("--q", f.q, "Lebesgue exponent")
      ->check(CLI::PositiveNumber);
  boundary->add_option("--L-max", f.L_max, "largest partial sum index")
      ->check(CLI::Range(1000ll, 4000000000ll));

  CLI::App* selftest =
      app.add_subcommand("selftest", "run the built-in sanity checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (selftest->parsed()) {
      const int failures = trimul::run_selftest(std::cout);
      std::cout << (failures == 0 ? "self test passed"
                                  : "self test FAILED: " +
                                        std::to_string(failures) + " checks")
                << "\n";
      return failures == 0 ? 0 : 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::optional<std::string> config_path;
    if_set(sub, "--config", [&] { config_path = f.config_path; });

    trimul::ExperimentConfig cfg =
        trimul::load_config(config_path, sub->get_name());
    if_set(sub, "--out", [&] { cfg.out_dir = f.out_dir; });
    if_set(sub, "--seed", [&] { cfg.seed = f.seed; });
    if_set(sub, "--q", [&] { cfg.q = f.q; });
    if_set(sub, "--jmax", [&] { cfg.j_max = f.j_max; });
    if_set(sub, "--grid", [&] { cfg.grid = f.grid; });
    if_set(sub, "--family-order", [&] { cfg.family_order = f.family_order; });
    if_set(sub, "--trials", [&] { cfg.trials = f.trials; });
    if_set(sub, "--size", [&] { cfg.partition_size = f.partition_size; });
    if_set(sub, "--L-max", [&] { cfg.L_max = f.L_max; });
    if_set(sub, "--multiplier", [&] { cfg.multiplier = f.multiplier; });

    const trimul::RunManifest manifest = trimul::run_experiment(cfg);
    for (const auto& fd : manifest.file_digests)
      std::cout << fd.second << "  " << fd.first << "\n";
    std::cout << "wrote " << cfg.out_dir << "/manifest.json in "
              << manifest.wall_ms << " ms\n";
    return 0;
  } catch (const trimul::refusal_error& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const trimul::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
}
