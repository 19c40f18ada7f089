#include "nystrom/commands.hpp"

#include "nystrom/error_analytics.hpp"
#include "nystrom/estimators.hpp"
#include "nystrom/image.hpp"
#include "nystrom/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace nystrom::cli {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void validate(const VerifyConfig& cfg) {
  if (cfg.p.empty() || cfg.n.empty() || cfg.k.empty() || cfg.families.empty())
    throw InputError("verify: grid lists must be nonempty");
  if (cfg.trials < 100) throw InputError("verify: trials must be at least 100");
  for (auto p : cfg.p)
    for (auto n : cfg.n)
      for (auto k : cfg.k) {
        if (p < 1 || n < 1 || k < 1) throw InputError("verify: sizes must be positive");
        if (k > p) throw InputError("verify: k = " + std::to_string(k) + " exceeds p = " + std::to_string(p));
        if (k > n) throw InputError("verify: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
      }
  for (const auto& f : cfg.families)
    if (f != "identity" && f != "random" && f != "ar1") throw InputError("verify: unknown sigma family '" + f + "'");
}

RealMatrix family_sigma(const std::string& family, Eigen::Index p, std::uint64_t seed) {
  if (family == "identity") return RealMatrix::Identity(p, p);
  if (family == "random") return analytics::random_spd(p, derive_seed(seed, {static_cast<std::uint64_t>(p), 0xfaULL}));
  if (family == "ar1") {
    RealMatrix s(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < p; ++i) s(i, j) = std::pow(0.5, static_cast<double>(std::abs(i - j)));
    return s;
  }
  throw InputError("unknown sigma family '" + family + "'");
}

std::vector<VerifyRow> run_verify(const VerifyConfig& cfg, Execution exec) {
  validate(cfg);
  std::vector<VerifyRow> rows;
  std::uint64_t cell = 0;
  for (auto p : cfg.p)
    for (auto n : cfg.n)
      for (auto k : cfg.k)
        for (const auto& family : cfg.families) {
          const analytics::GroundTruthModel model(family_sigma(family, p, cfg.seed), n);
          const IndexSubset subset = uniform_subset(p, k, derive_seed(cfg.seed, {cell, 1}));
          const auto rep = analytics::monte_carlo_verify(model, subset, cfg.trials, derive_seed(cfg.seed, {cell, 2}), exec);
          VerifyRow row;
          row.p = p;
          row.n = n;
          row.k = k;
          row.family = family;
          row.analytic_bias_fro = rep.analytic_bias.norm();
          row.empirical_bias_fro = rep.empirical_bias.norm();
          row.analytic_mse = rep.analytic_mse;
          row.empirical_mse = rep.empirical_mse;
          row.stderr_mse = rep.standard_error;
          row.pass = rep.agrees(cfg.nsigma);
          rows.push_back(row);
          ++cell;
        }
  return rows;
}

std::string verify_csv(const std::vector<VerifyRow>& rows) {
  std::string out =
      "p,n,k,sigma_family,analytic_bias_fro,empirical_bias_fro,analytic_mse,empirical_mse,stderr,pass\n";
  for (const auto& r : rows) {
    out += std::to_string(r.p) + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," + r.family + "," +
           fmt("%.10g", r.analytic_bias_fro) + "," + fmt("%.10g", r.empirical_bias_fro) + "," +
           fmt("%.10g", r.analytic_mse) + "," + fmt("%.10g", r.empirical_mse) + "," + fmt("%.10g", r.stderr_mse) +
           "," + (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

void validate(const BenchConfig& cfg) {
  if (cfg.p.empty()) throw InputError("bench: p grid is empty");
  if (cfg.n < 1 || cfg.k < 1) throw InputError("bench: n and k must be positive");
  if (cfg.repetitions < 5) throw InputError("bench: need at least 5 repetitions");
  for (auto p : cfg.p)
    if (cfg.k > p) throw InputError("bench: k exceeds p = " + std::to_string(p));
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  validate(cfg);
  std::vector<BenchRow> rows;
  for (auto p : cfg.p) {
    auto rng = make_stream(cfg.seed, {static_cast<std::uint64_t>(p), 0xbeULL});
    std::normal_distribution<double> normal;
    RealMatrix g(p, cfg.n);
    for (Eigen::Index c = 0; c < cfg.n; ++c)
      for (Eigen::Index r = 0; r < p; ++r) g(r, c) = normal(rng);
    const RealData x(std::move(g));
    const IndexSubset subset = uniform_subset(p, cfg.k, derive_seed(cfg.seed, {static_cast<std::uint64_t>(p)}));

    std::vector<double> t_nys, t_dense;
    NystromEstimate<Real> est{subset, {}, {}, {}};
    RealVector dense_ev;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      auto t0 = Clock::now();
      est = nystrom_eig(x, subset);
      t_nys.push_back(std::chrono::duration<double>(Clock::now() - t0).count());

      t0 = Clock::now();
      const RealMatrix dense = nystrom_estimate(x, subset).densify();
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(dense);
      t_dense.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      dense_ev = es.eigenvalues().reverse();
    }

    BenchRow row{p, cfg.n, cfg.k, median(t_nys), median(t_dense), 0.0};
    const double top = std::max(dense_ev(0), 1e-300);
    for (Eigen::Index i = 0; i < est.rank(); ++i)
      row.max_eig_rel_err = std::max(row.max_eig_rel_err, std::abs(est.eigenvalues(i) - dense_ev(i)) / top);
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "p,n,k,t_nystrom_s,t_dense_s,max_eig_rel_err\n";
  for (const auto& r : rows)
    out += std::to_string(r.p) + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
           fmt("%.6e", r.t_nystrom_s) + "," + fmt("%.6e", r.t_dense_s) + "," + fmt("%.3e", r.max_eig_rel_err) + "\n";
  return out;
}

std::string run_denoise(const DenoiseCommand& cmd, Execution exec) {
  const image::GrayImage clean = image::read_pgm(cmd.input);
  const image::GrayImage noisy = image::add_noise(clean, cmd.config.sigma, cmd.config.seed);
  if (cmd.noisy_output) image::write_pgm(*cmd.noisy_output, noisy);
  const denoise::PatchGrid grid(clean.width, clean.height, cmd.patch, cmd.region, cmd.overlap);
  const auto res = denoise::denoise_image(noisy, grid, cmd.config, exec);
  image::write_pgm(cmd.output, res.image);

  const auto in_psnr = image::psnr(clean, noisy);
  const auto out_psnr = image::psnr(clean, res.image);
  nlohmann::ordered_json j;
  j["input_psnr_db"] = in_psnr.infinite ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(in_psnr.db);
  j["output_psnr_db"] = out_psnr.infinite ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(out_psnr.db);
  j["input_psnr_infinite"] = in_psnr.infinite;
  j["output_psnr_infinite"] = out_psnr.infinite;
  j["method"] = std::string(denoise::method_name(cmd.config.method));
  j["sigma"] = cmd.config.sigma;
  j["rank"] = cmd.config.rank;
  j["region"] = cmd.region;
  j["patch"] = cmd.patch;
  j["overlap"] = cmd.overlap;
  j["seed"] = cmd.config.seed;
  j["runtime_s"] = res.runtime_s;
  j["regions_flagged"] = res.flagged_regions;
  return j.dump();
}

bool emit(const std::string& text, const std::filesystem::path& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return static_cast<bool>(fallback);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

int cmd_verify(const VerifyConfig& cfg, const std::filesystem::path& output, std::ostream& out, std::ostream& err) {
  std::vector<VerifyRow> rows;
  try {
    rows = run_verify(cfg);
  } catch (const InputError& e) {
    err << "verify: " << e.what() << "\n";
    return kUsage;
  }
  if (!emit(verify_csv(rows), output, out)) {
    err << "verify: cannot write " << output << "\n";
    return kIoError;
  }
  const bool all = std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.pass; });
  return all ? kOk : kCheckFailed;
}

int cmd_beamform(const beam::ExperimentConfig& cfg, const std::filesystem::path& output, std::ostream& out,
                 std::ostream& err) {
  std::vector<beam::ExperimentRow> rows;
  try {
    rows = beam::run_experiment(cfg);
  } catch (const InputError& e) {
    err << "beamform: " << e.what() << "\n";
    return kUsage;
  }
  if (!emit(beam::to_csv(rows), output, out)) {
    err << "beamform: cannot write " << output << "\n";
    return kIoError;
  }
  const bool finite = std::all_of(rows.begin(), rows.end(), [](const beam::ExperimentRow& r) {
    return !r.defined || (std::isfinite(r.mean_sinr_db) && std::isfinite(r.stderr_db));
  });
  return finite ? kOk : kCheckFailed;
}

int cmd_denoise(const DenoiseCommand& cmd, std::ostream& out, std::ostream& err) {
  std::string report;
  try {
    report = run_denoise(cmd);
  } catch (const image::PgmParseError& e) {
    err << "denoise: " << cmd.input.string() << ": " << e.what() << "\n";
    return kIoError;
  } catch (const InputError& e) {
    err << "denoise: " << e.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& e) {
    err << "denoise: " << e.what() << "\n";
    return kIoError;
  }
  if (!emit(report + "\n", cmd.report.value_or(std::filesystem::path{}), out)) {
    err << "denoise: cannot write report\n";
    return kIoError;
  }
  return kOk;
}

int cmd_bench(const BenchConfig& cfg, const std::filesystem::path& output, std::ostream& out, std::ostream& err) {
  std::vector<BenchRow> rows;
  try {
    rows = run_bench(cfg);
  } catch (const InputError& e) {
    err << "bench: " << e.what() << "\n";
    return kUsage;
  }
  if (!emit(bench_csv(rows), output, out)) {
    err << "bench: cannot write " << output << "\n";
    return kIoError;
  }
  const bool exact = std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.max_eig_rel_err <= 1e-8; });
  return exact ? kOk : kCheckFailed;
}

}  // namespace nystrom::cli
