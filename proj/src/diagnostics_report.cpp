#include "diagnostics_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jdfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Sample variance (ddof 1).
double var_of(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

// Halve every chain so slow drift shows up as between-sequence variance.
std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> seqs;
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& c : chains) len = std::min(len, c.size());
  const std::size_t half = len / 2;
  for (const auto& c : chains) {
    seqs.emplace_back(c.begin(), c.begin() + half);
    seqs.emplace_back(c.begin() + half, c.begin() + 2 * half);
  }
  return seqs;
}

}  // namespace

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need >= 2 chains");
  for (const auto& c : chains)
    if (c.size() < 4) throw std::invalid_argument("gelman_rubin: chains too short");
  const auto seqs = split_halves(chains);
  const std::size_t m = seqs.size();
  const double n = static_cast<double>(seqs.front().size());

  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(seqs[j]);
    w += var_of(seqs[j], means[j]);
  }
  w /= static_cast<double>(m);
  if (!(w > 0.0)) return kNaN;

  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / static_cast<double>(m - 1);

  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  for (const auto& c : chains)
    if (c.size() < 8) throw std::invalid_argument("effective_sample_size: chains too short");
  const auto seqs = split_halves(chains);
  const std::size_t m = seqs.size();
  const std::size_t n = seqs.front().size();
  const double total = static_cast<double>(m * n);

  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(seqs[j]);
    vars[j] = var_of(seqs[j], means[j]);
  }
  double w = 0.0;
  for (double v : vars) w += v;
  w /= static_cast<double>(m);
  if (!(w > 0.0)) return 0.0;  // constant chains carry no information

  const double grand = mean_of(means);
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= static_cast<double>(m - 1);
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * w + b_over_n;

  // Combined lag-t autocorrelation: 1 - (W - mean autocovariance_t) / var_plus.
  auto rho_at = [&](std::size_t t) {
    double acov = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& s = seqs[j];
      double acc = 0.0;
      for (std::size_t k = 0; k + t < n; ++k)
        acc += (s[k] - means[j]) * (s[k + t] - means[j]);
      acov += acc / nd;
    }
    acov /= static_cast<double>(m);
    return 1.0 - (w - acov) / var_plus;
  };

  // Geyer pairs: accumulate while rho_{2k} + rho_{2k+1} stays positive,
  // enforcing a nonincreasing envelope.
  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho_at(2 * k) + rho_at(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += pair;
  }
  tau = 2.0 * tau - 1.0;  // the k=0 pair includes rho_0 = 1
  tau = std::max(tau, 1.0 / std::log10(total + 10.0));  // guards absurdly small tau
  return total / tau;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const PosteriorDraws& draws) {
  std::vector<SummaryRow> rows;
  for (std::size_t col = 0; col < draws.layout.size(); ++col) {
    const auto series = draws.column(col);
    if (series.empty()) throw std::invalid_argument("summarize: no stored draws");
    SummaryRow row;
    row.name = draws.layout.names[col];
    row.mean = mean_of(series);
    row.sd = series.size() >= 2 ? std::sqrt(var_of(series, row.mean)) : 0.0;
    row.lo = quantile(series, 0.025);
    row.hi = quantile(series, 0.975);
    if (row.name.rfind("beta_", 0) == 0) row.hazard_ratio = std::exp(row.mean);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DiagnosticsRow> diagnose(const PosteriorDraws& draws) {
  std::vector<DiagnosticsRow> rows;
  const double total = static_cast<double>(draws.total_stored());
  for (std::size_t col = 0; col < draws.layout.size(); ++col) {
    const auto per_chain = draws.per_chain_column(col);
    DiagnosticsRow row;
    row.name = draws.layout.names[col];
    row.rhat = per_chain.size() >= 2 ? gelman_rubin(per_chain) : kNaN;
    row.ess_raw = effective_sample_size(per_chain);
    row.ess = std::min(row.ess_raw, total);
    row.ess_fraction = total > 0.0 ? row.ess / total : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

double survival_one(double chf, double log_linear, double nu, bool conditional) {
  const double scaled = chf * std::exp(log_linear);
  if (conditional) return std::exp(-scaled);
  return std::exp(-nu * std::log1p(scaled / nu));
}

}  // namespace

CurveBand marginal_survival(const PosteriorDraws& draws, std::size_t process,
                            const std::vector<double>& covariates, bool conditional) {
  CurveBand band;
  band.time = draws.report_times;
  const std::size_t nt = band.time.size();
  band.mean.assign(nt, 0.0);
  band.lo.assign(nt, 0.0);
  band.hi.assign(nt, 0.0);

  const auto [off, len] = draws.layout.beta_span.at(process);
  std::vector<std::vector<double>> values(nt);
  for (const ChainDraws& chain : draws.chains) {
    for (std::size_t d = 0; d < chain.scalars.size(); ++d) {
      double log_linear = 0.0;
      for (std::size_t k = 0; k < len; ++k)
        log_linear += chain.scalars[d][off + k] * covariates.at(k);
      const double nu = chain.scalars[d][draws.layout.nu_col];
      for (std::size_t k = 0; k < nt; ++k) {
        values[k].push_back(
            survival_one(chain.chf_report[d][process][k], log_linear, nu, conditional));
      }
    }
  }
  for (std::size_t k = 0; k < nt; ++k) {
    band.mean[k] = mean_of(values[k]);
    band.lo[k] = quantile(values[k], 0.025);
    band.hi[k] = quantile(values[k], 0.975);
  }
  return band;
}

std::vector<double> mean_survival(const PosteriorDraws& draws, std::size_t process,
                                  const std::vector<double>& covariates, bool conditional) {
  return marginal_survival(draws, process, covariates, conditional).mean;
}

}  // namespace jdfm
