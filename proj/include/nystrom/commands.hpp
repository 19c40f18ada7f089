#pragma once

#include "nystrom/beamforming.hpp"
#include "nystrom/denoise.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nystrom::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIoError = 3 };

// --- verify -----------------------------------------------------------------

struct VerifyConfig {
  std::vector<Eigen::Index> p{4, 8};
  std::vector<Eigen::Index> n{6, 12};
  std::vector<Eigen::Index> k{2, 4};
  std::vector<std::string> families{"identity", "random"};
  std::int64_t trials = 20000;
  std::uint64_t seed = 0;
  double nsigma = 4.0;
};

struct VerifyRow {
  Eigen::Index p = 0, n = 0, k = 0;
  std::string family;
  double analytic_bias_fro = 0.0;
  double empirical_bias_fro = 0.0;
  double analytic_mse = 0.0;
  double empirical_mse = 0.0;
  double stderr_mse = 0.0;
  bool pass = false;
};

/// Throws InputError for invalid grids (k > p, k > n, unknown family, trials < 100).
void validate(const VerifyConfig& cfg);
/// Covariance of the named family: identity, random (seeded SPD) or ar1 (rho = 0.5).
RealMatrix family_sigma(const std::string& family, Eigen::Index p, std::uint64_t seed);
std::vector<VerifyRow> run_verify(const VerifyConfig& cfg, Execution exec = Execution::parallel);
std::string verify_csv(const std::vector<VerifyRow>& rows);

// --- bench ------------------------------------------------------------------

struct BenchConfig {
  std::vector<Eigen::Index> p{200, 400, 800, 1600};
  Eigen::Index n = 100;
  Eigen::Index k = 10;
  int repetitions = 5;
  std::uint64_t seed = 0;
};

struct BenchRow {
  Eigen::Index p = 0, n = 0, k = 0;
  double t_nystrom_s = 0.0;  // median
  double t_dense_s = 0.0;    // median
  double max_eig_rel_err = 0.0;
};

void validate(const BenchConfig& cfg);
/// Times nystrom_eig against densifying the same estimate and running a dense
/// symmetric eigensolver on it; records the largest eigenvalue discrepancy.
std::vector<BenchRow> run_bench(const BenchConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

// --- denoise ----------------------------------------------------------------

struct DenoiseCommand {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> noisy_output;
  denoise::DenoiseConfig config;
  int region = 32;
  int patch = 8;
  double overlap = 0.5;
};

/// Reads the clean PGM, adds noise, denoises, writes the output PGM and returns the
/// JSON report {input_psnr_db, output_psnr_db, method, sigma, rank, region, patch,
/// overlap, seed, runtime_s, regions_flagged}. Infinite PSNR values are written as
/// null with a companion *_infinite flag.
std::string run_denoise(const DenoiseCommand& cmd, Execution exec = Execution::parallel);

// --- drivers returning exit codes -------------------------------------------

/// Writes `text` to `path`, or to `fallback` when path is empty. Returns false on I/O error.
bool emit(const std::string& text, const std::filesystem::path& path, std::ostream& fallback);

int cmd_verify(const VerifyConfig& cfg, const std::filesystem::path& output, std::ostream& out, std::ostream& err);
int cmd_beamform(const beam::ExperimentConfig& cfg, const std::filesystem::path& output, std::ostream& out,
                 std::ostream& err);
int cmd_denoise(const DenoiseCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchConfig& cfg, const std::filesystem::path& output, std::ostream& out, std::ostream& err);

}  // namespace nystrom::cli
