#include "segfuse/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "segfuse/error.hpp"
#include "segfuse/rng.hpp"

namespace segfuse {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased (n - 1) variance.
double variance_of(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Two-sided normal tail for |z|.
double normal_two_sided(double z) { return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0))); }

double student_two_sided(double t, double df) {
  if (t == 0.0) return 1.0;
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

bool all_equal(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

std::vector<double> differences(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "paired samples must have equal length");
  }
  std::vector<double> d(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) d[n] = x[n] - y[n];
  return d;
}

// Average ranks (1-based) of `values`, plus the tie-group sizes.
struct Ranking {
  std::vector<double> ranks;
  std::vector<std::size_t> tie_groups;
};

Ranking rank_with_ties(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Ranking r{std::vector<double>(n), {}};
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    const double avg = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t m = start; m < end; ++m) r.ranks[order[m]] = avg;
    if (end - start > 1) r.tie_groups.push_back(end - start);
    start = end;
  }
  return r;
}

double tie_sum(const std::vector<std::size_t>& groups) {
  double sum = 0.0;
  for (std::size_t t : groups) {
    const auto td = static_cast<double>(t);
    sum += td * td * td - td;
  }
  return sum;
}

// Signed-rank p-value on non-zero differences, no size precondition.
double signed_rank_p(const std::vector<double>& nonzero) {
  const std::size_t n = nonzero.size();
  std::vector<double> magnitudes(n);
  for (std::size_t m = 0; m < n; ++m) magnitudes[m] = std::abs(nonzero[m]);
  const Ranking ranking = rank_with_ties(magnitudes);

  if (n <= kSignedRankExactMax) {
    // Doubled ranks are integers even with ties; count sign patterns by the
    // doubled positive-rank sum.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0, observed = 0;
    for (std::size_t m = 0; m < n; ++m) {
      doubled[m] = static_cast<std::size_t>(std::lround(2.0 * ranking.ranks[m]));
      total += doubled[m];
      if (nonzero[m] > 0.0) observed += doubled[m];
    }
    std::vector<std::uint64_t> counts(total + 1, 0);
    counts[0] = 1;
    for (std::size_t r : doubled) {
      for (std::size_t s = total; s >= r; --s) {
        counts[s] += counts[s - r];
        if (s == r) break;
      }
    }
    const auto centre = [&](std::size_t s) {
      const auto diff = static_cast<long long>(2 * s) - static_cast<long long>(total);
      return diff < 0 ? -diff : diff;
    };
    const long long threshold = centre(observed);
    std::uint64_t extreme = 0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (centre(s) >= threshold) extreme += counts[s];
    }
    return static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
  }

  double w_plus = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (nonzero[m] > 0.0) w_plus += ranking.ranks[m];
  }
  const auto nd = static_cast<double>(n);
  const double mu = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_sum(ranking.tie_groups) / 48.0;
  if (var <= 0.0) return 1.0;
  const double z = std::max(std::abs(w_plus - mu) - 0.5, 0.0) / std::sqrt(var);
  return normal_two_sided(z);
}

std::vector<double> drop_zeros(const std::vector<double>& d) {
  std::vector<double> out;
  for (double v : d) {
    if (v != 0.0) out.push_back(v);
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::ParseError, "bad number '" + std::string(token) + "' in null table");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view token) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::ParseError, "bad integer '" + std::string(token) + "' in null table");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lilliefors
// ---------------------------------------------------------------------------

double lilliefors_statistic(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "lilliefors statistic needs n >= 2");
  const double mean = mean_of(sample);
  const double var = variance_of(sample, mean);
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateSample, "sample has zero variance");
  const double sd = std::sqrt(var);

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto nd = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf((sorted[i] - mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
  }
  return d;
}

LillieforsTable LillieforsTable::generate(std::uint64_t seed, std::size_t replicates,
                                          std::size_t n_min, std::size_t n_max,
                                          std::size_t level_count) {
  if (replicates < 2 || level_count < 2 || n_min < kMinSize || n_max < n_min) {
    throw Error(ErrorCode::InvalidArgument, "invalid null-table generation parameters");
  }
  LillieforsTable table;
  table.seed_ = seed;
  table.replicates_ = replicates;
  for (std::size_t l = 0; l < level_count; ++l) {
    const double level = static_cast<double>(l) / static_cast<double>(level_count - 1);
    table.levels_.push_back(parse_double(format_number(level)));
  }

  std::vector<double> draws, stats(replicates);
  for (std::size_t n = n_min; n <= n_max; ++n) {
    SplitMix64 rng(derive_seed(seed, n));
    draws.resize(n);
    for (std::size_t r = 0; r < replicates; ++r) {
      for (double& x : draws) x = rng.normal();
      stats[r] = lilliefors_statistic(draws);
    }
    std::sort(stats.begin(), stats.end());
    std::vector<double> row;
    row.reserve(level_count);
    for (double level : table.levels_) {
      const double pos = level * static_cast<double>(replicates - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, replicates - 1);
      const double frac = pos - static_cast<double>(lo);
      // Round to the serialised precision so in-memory and parsed tables agree.
      row.push_back(parse_double(format_number(stats[lo] + frac * (stats[hi] - stats[lo]))));
    }
    table.rows_[n] = std::move(row);
  }
  return table;
}

LillieforsTable LillieforsTable::parse(std::string_view text) {
  LillieforsTable table;
  bool have_version = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (key == "version") {
      if (tokens.size() != 1 || parse_unsigned(tokens[0]) != kVersion) {
        throw Error(ErrorCode::ParseError, "unsupported null-table version");
      }
      have_version = true;
    } else if (key == "seed" && tokens.size() == 1) {
      table.seed_ = parse_unsigned(tokens[0]);
    } else if (key == "replicates" && tokens.size() == 1) {
      table.replicates_ = parse_unsigned(tokens[0]);
    } else if (key == "levels" && !tokens.empty()) {
      const auto count = parse_unsigned(tokens[0]);
      if (count + 1 != tokens.size()) throw Error(ErrorCode::ParseError, "level count mismatch");
      for (std::size_t t = 1; t < tokens.size(); ++t) table.levels_.push_back(parse_double(tokens[t]));
    } else if (key == "n" && !tokens.empty()) {
      const auto size = parse_unsigned(tokens[0]);
      if (tokens.size() != table.levels_.size() + 1) {
        throw Error(ErrorCode::ParseError, "row for n=" + tokens[0] + " has wrong length");
      }
      std::vector<double> row;
      for (std::size_t t = 1; t < tokens.size(); ++t) row.push_back(parse_double(tokens[t]));
      if (!std::is_sorted(row.begin(), row.end())) {
        throw Error(ErrorCode::ParseError, "quantiles for n=" + tokens[0] + " are not ascending");
      }
      table.rows_[size] = std::move(row);
    } else {
      throw Error(ErrorCode::ParseError, "unrecognised null-table line: " + line);
    }
  }
  if (!have_version || table.replicates_ == 0 || table.levels_.size() < 2 || table.rows_.empty()) {
    throw Error(ErrorCode::ParseError, "null table is incomplete");
  }
  if (table.levels_.front() != 0.0 || table.levels_.back() != 1.0 ||
      !std::is_sorted(table.levels_.begin(), table.levels_.end())) {
    throw Error(ErrorCode::ParseError, "null-table levels must ascend from 0 to 1");
  }
  return table;
}

std::string LillieforsTable::serialize() const {
  std::string out;
  out += "# Monte Carlo null distribution of the Lilliefors statistic\n";
  out += "version " + std::to_string(kVersion) + "\n";
  out += "seed " + std::to_string(seed_) + "\n";
  out += "replicates " + std::to_string(replicates_) + "\n";
  out += "levels " + std::to_string(levels_.size());
  for (double l : levels_) out += " " + format_number(l);
  out += "\n";
  for (const auto& [n, row] : rows_) {
    out += "n " + std::to_string(n);
    for (double q : row) out += " " + format_number(q);
    out += "\n";
  }
  return out;
}

double LillieforsTable::p_value(std::size_t n, double statistic) const {
  if (rows_.empty()) throw Error(ErrorCode::InvalidArgument, "empty null table");
  auto it = rows_.find(n);
  if (it == rows_.end()) {
    const std::size_t largest = rows_.rbegin()->first;
    if (n < largest) {
      throw Error(ErrorCode::InvalidArgument,
                  "no null distribution for sample size " + std::to_string(n));
    }
    it = std::prev(rows_.end());
    statistic *= std::sqrt(static_cast<double>(n) / static_cast<double>(largest));
  }
  const std::vector<double>& q = it->second;
  const double floor_p = 1.0 / static_cast<double>(replicates_ + 1);
  if (statistic < q.front()) return 1.0;
  if (statistic >= q.back()) return floor_p;
  // Last level whose quantile does not exceed the statistic.
  const auto upper = std::upper_bound(q.begin(), q.end(), statistic);
  const auto k = static_cast<std::size_t>(upper - q.begin()) - 1;
  const double span = q[k + 1] - q[k];
  const double frac = span > 0.0 ? (statistic - q[k]) / span : 0.0;
  const double cdf = levels_[k] + frac * (levels_[k + 1] - levels_[k]);
  return std::max(1.0 - cdf, floor_p);
}

NormalityResult lilliefors_normality(std::span<const double> sample, double alpha,
                                     const LillieforsTable& table) {
  if (sample.size() < LillieforsTable::kMinSize) {
    throw Error(ErrorCode::InvalidArgument, "lilliefors test needs at least 4 observations");
  }
  NormalityResult r;
  r.statistic = lilliefors_statistic(sample);
  r.p_value = table.p_value(sample.size(), r.statistic);
  r.normal = r.p_value >= alpha;
  return r;
}

// ---------------------------------------------------------------------------
// Location tests
// ---------------------------------------------------------------------------

double paired_t_test(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> d = differences(x, y);
  if (d.size() < 2) throw Error(ErrorCode::InvalidArgument, "paired t-test needs n >= 2");
  const double mean = mean_of(d);
  const double var = variance_of(d, mean);
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateSample, "all paired differences are equal");
  const auto n = static_cast<double>(d.size());
  return student_two_sided(mean / std::sqrt(var / n), n - 1.0);
}

double two_sample_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "two-sample t-test needs n >= 2 per sample");
  }
  const double mx = mean_of(x), my = mean_of(y);
  const double vx = variance_of(x, mx), vy = variance_of(y, my);
  if (!(vx > 0.0) || !(vy > 0.0)) {
    throw Error(ErrorCode::DegenerateSample, "a sample has zero variance");
  }
  const double ax = vx / static_cast<double>(x.size());
  const double ay = vy / static_cast<double>(y.size());
  const double t = (mx - my) / std::sqrt(ax + ay);
  const double df = (ax + ay) * (ax + ay) /
                    (ax * ax / static_cast<double>(x.size() - 1) +
                     ay * ay / static_cast<double>(y.size() - 1));
  return student_two_sided(t, df);
}

double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> nonzero = drop_zeros(differences(x, y));
  if (nonzero.empty()) throw Error(ErrorCode::DegenerateSample, "all differences are zero");
  if (nonzero.size() < 5) {
    throw Error(ErrorCode::InvalidArgument, "signed-rank test needs 5 non-zero differences");
  }
  return signed_rank_p(nonzero);
}

double mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size(), m = y.size();
  if (n < 3 || m < 3) throw Error(ErrorCode::InvalidArgument, "rank-sum test needs n >= 3 per sample");

  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const Ranking ranking = rank_with_ties(pooled);
  double rank_sum_x = 0.0;
  for (std::size_t i = 0; i < n; ++i) rank_sum_x += ranking.ranks[i];
  const auto nd = static_cast<double>(n), md = static_cast<double>(m);
  const double u = rank_sum_x - nd * (nd + 1.0) / 2.0;

  if (n * m <= kRankSumExactMaxProduct && ranking.tie_groups.empty()) {
    // g(a, c, v): orderings of a x-values and c y-values with U = v. The
    // largest element is either an x beating all c y-values or a y:
    //   g(a, c, v) = g(a - 1, c, v - c) + g(a, c - 1, v)
    // `prev` holds layer c - 1, `f` is filled for layer c.
    const std::size_t max_u = n * m;
    std::vector<std::vector<std::uint64_t>> f(n + 1, std::vector<std::uint64_t>(max_u + 1, 0));
    std::vector<std::vector<std::uint64_t>> prev(n + 1, std::vector<std::uint64_t>(max_u + 1, 0));
    for (std::size_t a = 0; a <= n; ++a) prev[a][0] = 1;  // c = 0
    for (std::size_t c = 1; c <= m; ++c) {
      for (std::size_t a = 0; a <= n; ++a) {
        for (std::size_t v = 0; v <= max_u; ++v) {
          std::uint64_t val = prev[a][v];
          if (a > 0 && v >= c) val += f[a - 1][v - c];
          f[a][v] = val;
        }
      }
      std::swap(prev, f);
    }
    const std::vector<std::uint64_t>& dist = prev[n];
    const auto observed = static_cast<long long>(std::llround(u));
    const auto centre = [&](long long v) {
      const long long diff = 2 * v - static_cast<long long>(max_u);
      return diff < 0 ? -diff : diff;
    };
    const long long threshold = centre(observed);
    std::uint64_t extreme = 0, total = 0;
    for (std::size_t v = 0; v <= max_u; ++v) {
      total += dist[v];
      if (centre(static_cast<long long>(v)) >= threshold) extreme += dist[v];
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
  }

  const double total = nd + md;
  const double var =
      nd * md / 12.0 * ((total + 1.0) - tie_sum(ranking.tie_groups) / (total * (total - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(std::abs(u - nd * md / 2.0) - 0.5, 0.0) / std::sqrt(var);
  return normal_two_sided(z);
}

// ---------------------------------------------------------------------------
// Comparison protocol
// ---------------------------------------------------------------------------

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::PairedT: return "paired-t";
    case TestKind::WilcoxonSignedRank: return "wilcoxon-signed-rank";
    case TestKind::TwoSampleT: return "welch-t";
    case TestKind::MannWhitneyU: return "mann-whitney-u";
  }
  return "unknown";
}

namespace {

bool passes_normality(std::span<const double> sample, double alpha, const LillieforsTable& table) {
  if (all_equal(sample)) return false;
  return lilliefors_normality(sample, alpha, table).normal;
}

void fill_verdict(ComparisonResult& r, double alpha, double first_minus_second, bool higher_is_better) {
  r.significant = r.p_value < alpha;
  if (!r.significant || first_minus_second == 0.0) {
    r.better = Better::Neither;
    return;
  }
  const bool first_higher = first_minus_second > 0.0;
  r.better = first_higher == higher_is_better ? Better::First : Better::Second;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ComparisonResult compare_paired(std::span<const double> x, std::span<const double> y,
                                double alpha, bool higher_is_better,
                                const LillieforsTable& table) {
  const std::vector<double> d = differences(x, y);
  ComparisonResult r;
  if (passes_normality(d, alpha, table)) {
    r.test_used = TestKind::PairedT;
    r.p_value = paired_t_test(x, y);
  } else {
    r.test_used = TestKind::WilcoxonSignedRank;
    const std::vector<double> nonzero = drop_zeros(d);
    // Fewer than 5 non-zero differences still has a valid exact p-value.
    r.p_value = nonzero.empty() ? 1.0 : signed_rank_p(nonzero);
  }
  double direction = mean_of(d);
  if (direction == 0.0) direction = median_of(d);
  fill_verdict(r, alpha, direction, higher_is_better);
  return r;
}

ComparisonResult compare_unpaired(std::span<const double> x, std::span<const double> y,
                                  double alpha, bool higher_is_better,
                                  const LillieforsTable& table) {
  ComparisonResult r;
  if (passes_normality(x, alpha, table) && passes_normality(y, alpha, table)) {
    r.test_used = TestKind::TwoSampleT;
    r.p_value = two_sample_t_test(x, y);
  } else {
    r.test_used = TestKind::MannWhitneyU;
    r.p_value = mann_whitney_u(x, y);
  }
  double direction = mean_of(x) - mean_of(y);
  if (direction == 0.0) {
    direction = median_of({x.begin(), x.end()}) - median_of({y.begin(), y.end()});
  }
  fill_verdict(r, alpha, direction, higher_is_better);
  return r;
}

// ---------------------------------------------------------------------------
// Win/loss table
// ---------------------------------------------------------------------------

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::EnsembleWins: return "ensemble_wins";
    case Verdict::MemberWins: return "member_wins";
    case Verdict::NoDifference: return "no_difference";
  }
  return "unknown";
}

Verdict parse_verdict(std::string_view text) {
  for (Verdict v : {Verdict::EnsembleWins, Verdict::MemberWins, Verdict::NoDifference}) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown verdict '" + std::string(text) + "'");
}

WinLossTable::WinLossTable(std::vector<std::string> datasets, std::vector<std::string> metrics,
                           std::vector<std::string> members, std::vector<std::string> ensembles)
    : datasets_(std::move(datasets)),
      metrics_(std::move(metrics)),
      members_(std::move(members)),
      ensembles_(std::move(ensembles)) {}

void WinLossTable::set(const CellKey& key, Verdict verdict) {
  const auto known = [](const std::vector<std::string>& axis, const std::string& v) {
    return std::find(axis.begin(), axis.end(), v) != axis.end();
  };
  if (!known(datasets_, key.dataset) || !known(metrics_, key.metric) ||
      !known(members_, key.member) || !known(ensembles_, key.ensemble)) {
    throw Error(ErrorCode::InvalidArgument, "cell (" + key.dataset + ", " + key.metric + ", " +
                                                key.member + ", " + key.ensemble +
                                                ") is outside the table");
  }
  cells_[key] = verdict;
}

std::optional<Verdict> WinLossTable::get(const CellKey& key) const {
  const auto it = cells_.find(key);
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, int> aggregate_scores(const WinLossTable& table) {
  std::map<std::string, int> scores;
  for (const auto& ensemble : table.ensembles()) {
    int score = 0;
    for (const auto& dataset : table.datasets()) {
      for (const auto& metric : table.metrics()) {
        for (const auto& member : table.members()) {
          const auto verdict = table.get({dataset, metric, member, ensemble});
          if (!verdict) {
            throw Error(ErrorCode::IncompleteTable, "missing verdict for (" + dataset + ", " +
                                                        metric + ", " + member + ", " + ensemble +
                                                        ")");
          }
          if (*verdict == Verdict::EnsembleWins) ++score;
          if (*verdict == Verdict::MemberWins) --score;
        }
      }
    }
    scores[ensemble] = score;
  }
  return scores;
}

MetricVector overfit_magnitude(const MetricVector& train, const MetricVector& test) {
  MetricVector out{};
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = train[m] - test[m];
  return out;
}

MetricVector overfit_magnitude(const MetricSet& train, const MetricSet& test) {
  return overfit_magnitude(to_vector(train), to_vector(test));
}

}  // namespace segfuse
