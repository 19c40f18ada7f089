#include "nystrom/commands.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <iostream>
#include <sstream>

namespace {

using namespace nystrom;

/// "lo:hi:points" -> log-spaced grid.
std::vector<Eigen::Index> parse_grid(const std::string& spec) {
  std::stringstream ss(spec);
  std::string part;
  std::vector<long long> v;
  while (std::getline(ss, part, ':')) v.push_back(std::stoll(part));
  if (v.size() != 3) throw InputError("snapshot grid must look like lo:hi:points");
  return beam::log_grid(v[0], v[1], static_cast<int>(v[2]));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nystrom covariance estimation experiments"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: all cores)");

  // verify
  cli::VerifyConfig vcfg;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of the closed-form bias and MSE");
  verify->add_option("--p", vcfg.p, "Dimensions")->delimiter(',');
  verify->add_option("--n", vcfg.n, "Sample counts")->delimiter(',');
  verify->add_option("--k", vcfg.k, "Subset sizes")->delimiter(',');
  verify->add_option("--families", vcfg.families, "Covariance families: identity, random, ar1")->delimiter(',');
  verify->add_option("--trials", vcfg.trials, "Monte Carlo trials per cell");
  verify->add_option("--seed", vcfg.seed, "Base seed");
  verify->add_option("--output", verify_out, "CSV output path (default stdout)");

  // beamform
  beam::ExperimentConfig bcfg;
  std::string grid_spec = "10:10000:10";
  std::string beam_out;
  Eigen::Index rank = 7;
  auto* beamform = app.add_subcommand("beamform", "SINR versus snapshot count for the beamformer family");
  beamform->add_option("--snr-db", bcfg.snr_db, "Desired-signal SNR values in dB")->delimiter(',');
  beamform->add_option("--inr-db", bcfg.inr_db, "Interference-to-noise ratio in dB");
  beamform->add_option("--p", bcfg.elements, "Array elements");
  beamform->add_option("--snapshots-grid", grid_spec, "lo:hi:points, log-spaced");
  beamform->add_option("--trials", bcfg.trials, "Trials per grid cell");
  beamform->add_option("--rank", rank, "Rank for the projection and Nystrom beamformers");
  beamform->add_option("--k", bcfg.nystrom_subset, "Nystrom subset size (default: 2 * rank)");
  beamform->add_option("--seed", bcfg.seed, "Base seed");
  beamform->add_option("--output", beam_out, "CSV output path (default stdout)");

  // denoise
  cli::DenoiseCommand dcmd;
  std::string method = "nystrom";
  std::string subset_mode = "coordinates";
  std::string report_path, noisy_path;
  auto* den = app.add_subcommand("denoise", "Patch-subspace denoising of a PGM image");
  den->add_option("--input", dcmd.input, "Clean input PGM (P5)")->required();
  den->add_option("--output", dcmd.output, "Denoised output PGM")->required();
  den->add_option("--report", report_path, "JSON report path (default stdout)");
  den->add_option("--noisy-output", noisy_path, "Also write the noisy image");
  den->add_option("--sigma", dcmd.config.sigma, "Noise standard deviation");
  den->add_option("--rank", dcmd.config.rank, "Subspace rank");
  den->add_option("--k", dcmd.config.subset_size, "Nystrom subset size (default: rank)");
  den->add_option("--subset", subset_mode, "Nystrom subset: coordinates or patches")
      ->check(CLI::IsMember({"coordinates", "patches"}));
  den->add_option("--region", dcmd.region, "Region side in pixels");
  den->add_option("--patch", dcmd.patch, "Patch side in pixels");
  den->add_option("--overlap", dcmd.overlap, "Overlap fraction in [0, 1)");
  den->add_option("--method", method, "pca or nystrom")->check(CLI::IsMember({"pca", "nystrom"}));
  den->add_option("--seed", dcmd.config.seed, "Seed for noise and subsets");

  // bench
  cli::BenchConfig ccfg;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time the factored eigensolver against a dense one");
  bench->add_option("--p", ccfg.p, "Dimensions")->delimiter(',');
  bench->add_option("--n", ccfg.n, "Samples");
  bench->add_option("--k", ccfg.k, "Subset size");
  bench->add_option("--reps", ccfg.repetitions, "Repetitions per size (median reported, >= 5)");
  bench->add_option("--seed", ccfg.seed, "Base seed");
  bench->add_option("--output", bench_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*verify) {
      const int code = cli::cmd_verify(vcfg, verify_out, std::cout, std::cerr);
      if (code == cli::kUsage) std::cerr << verify->help();
      return code;
    }
    if (*beamform) {
      bcfg.snapshots = parse_grid(grid_spec);
      bcfg.projection_rank = rank;
      bcfg.nystrom_rank = rank;
      const int code = cli::cmd_beamform(bcfg, beam_out, std::cout, std::cerr);
      if (code == cli::kUsage) std::cerr << beamform->help();
      return code;
    }
    if (*den) {
      dcmd.config.method = method == "pca" ? denoise::Method::pca : denoise::Method::nystrom;
      dcmd.config.subset_mode =
          subset_mode == "patches" ? denoise::SubsetMode::patches : denoise::SubsetMode::coordinates;
      if (!report_path.empty()) dcmd.report = report_path;
      if (!noisy_path.empty()) dcmd.noisy_output = noisy_path;
      const int code = cli::cmd_denoise(dcmd, std::cout, std::cerr);
      if (code == cli::kUsage) std::cerr << den->help();
      return code;
    }
    if (*bench) {
      const int code = cli::cmd_bench(ccfg, bench_out, std::cout, std::cerr);
      if (code == cli::kUsage) std::cerr << bench->help();
      return code;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kCheckFailed;
  }
  return cli::kOk;
}
