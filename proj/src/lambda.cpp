#include "cpflow/lambda.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "cpflow/numerics.hpp"

namespace cpflow {

namespace {

constexpr int kBaseHorizon = 2048;

using TailKey = std::tuple<int, double, double, double, int, int, int, int>;

TailKey make_key(const TailRule& r, int oF, int oG) {
  return {static_cast<int>(r.kind), r.p, r.lo, r.hi, r.ket_shift, r.bra_shift, oF, oG};
}

}  // namespace

// Immutable snapshot of prefix log-sums for one (rule, offsets) pair.
// log_prefix[i] = sum of log tau(j) over first <= j < first + i, zero
// factors counted separately.
struct TailTable {
  int first = 1;
  std::vector<double> log_prefix{0.0};
  std::vector<int> zero_prefix{0};
  bool total_ready = false;
  double total_log = 0.0;
  bool total_zero = false;
  int last = INT_MAX;  // last position with a defined factor

  int length() const { return static_cast<int>(log_prefix.size()) - 1; }
};

struct LambdaSequence::Cache {
  std::mutex mutex;
  std::map<TailKey, std::shared_ptr<const TailTable>> tables;
};

LambdaSequence::LambdaSequence(LambdaKind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)), cache_(std::make_shared<Cache>()) {}

LambdaSequence LambdaSequence::linear() { return {LambdaKind::Linear, {}}; }
LambdaSequence LambdaSequence::geometric() { return {LambdaKind::Geometric, {}}; }

LambdaSequence LambdaSequence::custom(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("invalid sequence: empty lambda list");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("invalid sequence: lambda values must be positive");
    }
  }
  return {LambdaKind::Custom, std::move(values)};
}

std::string LambdaSequence::name() const {
  switch (kind_) {
    case LambdaKind::Linear: return "linear";
    case LambdaKind::Geometric: return "geometric";
    case LambdaKind::Custom: return "custom";
  }
  return "?";
}

int LambdaSequence::size() const {
  return kind_ == LambdaKind::Custom ? static_cast<int>(values_.size()) : INT_MAX;
}

double LambdaSequence::value(int j) const {
  if (j < 1 || j > size()) throw InvalidArgument("lambda index out of range");
  switch (kind_) {
    case LambdaKind::Linear: return j;
    case LambdaKind::Geometric: return std::ldexp(1.0, j);
    case LambdaKind::Custom: return values_[j - 1];
  }
  return 0.0;
}

double LambdaSequence::ratio(int i, int j) const {
  if (kind_ == LambdaKind::Geometric) {
    if (i < 1 || j < 1) throw InvalidArgument("lambda index out of range");
    return std::ldexp(1.0, i - j);
  }
  return value(i) / value(j);
}

double LambdaSequence::tail_factor(const TailRule& rule, int j, int oF, int oG) const {
  const int a = j + oF;
  const int b = j + oG;
  auto overlap = [this](int u, int v) {
    if (u == v) return 1.0;
    const double r = ratio(u, v);
    return 2.0 * r / (1.0 + r * r);
  };
  switch (rule.kind) {
    case TailKind::Identity: return overlap(a, b);
    case TailKind::Mult: {
      const double r = ratio(a, b);
      const double lb = value(b);
      const double la = value(a);
      const double base = 2.0 * r / (1.0 + r * r + 2.0 * rule.p / (lb * lb));
      const double s = 0.5 * (la * la + lb * lb) + rule.p;
      const double upper = rule.lo == 0.0 ? 1.0 : std::exp(-s * rule.lo);
      const double lower = std::isinf(rule.hi) ? 0.0 : std::exp(-s * rule.hi);
      return base * (upper - lower);
    }
    case TailKind::RefRank:
      return overlap(a, j - rule.ket_shift) * overlap(j - rule.bra_shift, b);
  }
  return 0.0;
}

namespace {

std::shared_ptr<const TailTable> extended(const LambdaSequence& seq,
                                          const TailTable& old,
                                          const TailRule& rule, int oF, int oG,
                                          int upto) {
  auto t = std::make_shared<TailTable>(old);
  const int stop = std::min(upto, t->last);
  for (int j = t->first + t->length(); j <= stop; ++j) {
    const double tau = seq.tail_factor(rule, j, oF, oG);
    const bool zero = !(tau > 0.0);
    t->log_prefix.push_back(t->log_prefix.back() + (zero ? 0.0 : std::log(tau)));
    t->zero_prefix.push_back(t->zero_prefix.back() + (zero ? 1 : 0));
  }
  return t;
}

}  // namespace

namespace {

std::shared_ptr<const TailTable> fetch(const LambdaSequence& seq,
                                       LambdaSequence::Cache& cache,
                                       const TailRule& rule, int oF, int oG,
                                       int upto, bool need_total);

}  // namespace

double LambdaSequence::partial_product(const TailRule& rule, int from, int to,
                                       int oF, int oG) const {
  if (to < from) return 1.0;
  if (rule.kind == TailKind::Identity && oF == oG) return 1.0;
  auto t = fetch(*this, *cache_, rule, oF, oG, to, false);
  if (from < t->first) throw InvalidArgument("tail product below first valid position");
  const int hi = std::min(to, t->last) - t->first + 1;
  const int lo = from - t->first;
  if (hi <= lo) return 1.0;
  if (t->zero_prefix[hi] - t->zero_prefix[lo] > 0) return 0.0;
  return std::exp(t->log_prefix[hi] - t->log_prefix[lo]);
}

double LambdaSequence::tail_product(const TailRule& rule, int from, int oF,
                                    int oG) const {
  if (rule.kind == TailKind::Identity && oF == oG) return 1.0;
  auto t = fetch(*this, *cache_, rule, oF, oG, from, true);
  if (from < t->first) throw InvalidArgument("tail product below first valid position");
  if (from > t->last) return 1.0;
  const int lo = from - t->first;
  if (t->total_zero) return 0.0;
  if (lo < t->length()) {
    if (t->zero_prefix.back() - t->zero_prefix[lo] > 0) return 0.0;
  }
  return std::exp(t->total_log - t->log_prefix[lo]);
}

namespace {

std::shared_ptr<const TailTable> fetch(const LambdaSequence& seq,
                                       LambdaSequence::Cache& cache,
                                       const TailRule& rule, int oF, int oG,
                                       int upto, bool need_total) {
  const auto key = make_key(rule, oF, oG);
  std::lock_guard<std::mutex> lock(cache.mutex);
  auto& slot = cache.tables[key];
  if (!slot) {
    auto t = std::make_shared<TailTable>();
    t->first = std::max({1, 1 - oF, 1 - oG, rule.first_valid_position()});
    const int n = seq.size();
    if (n != INT_MAX) {
      t->last = std::min({n, n - oF, n - oG});
    }
    slot = t;
  }
  const int horizon = 8 * kBaseHorizon + slot->first;
  int want = upto;
  if (need_total) want = std::max(upto, slot->last != INT_MAX ? slot->last : horizon);
  if (slot->first + slot->length() <= std::min(want, slot->last)) {
    // grow geometrically so repeated small requests stay cheap
    const int target = std::max(want, slot->first + 2 * slot->length());
    slot = extended(seq, *slot, rule, oF, oG, target);
  }
  if (need_total && !slot->total_ready) {
    auto t = std::make_shared<TailTable>(*slot);
    if (t->last != INT_MAX) {
      const int len = std::max(0, t->last - t->first + 1);
      t->total_log = t->log_prefix[len];
      t->total_zero = t->zero_prefix[len] > 0;
    } else {
      std::vector<double> xs;
      std::vector<double> ss;
      for (int k = 0; k < 4; ++k) {
        const int m = kBaseHorizon << k;
        xs.push_back(1.0 / m);
        ss.push_back(t->log_prefix[m]);
      }
      const double d2 = ss[2] - ss[1];
      const double d3 = ss[3] - ss[2];
      const bool diverges = d3 < -1e-12 && std::abs(d3) > 0.75 * std::abs(d2);
      t->total_zero = diverges || t->zero_prefix[8 * kBaseHorizon] > 0 ||
                      ss[3] < -700.0;
      t->total_log = t->total_zero ? 0.0 : neville_at_zero(xs, ss).value;
    }
    t->total_ready = true;
    slot = t;
  }
  return slot;
}

}  // namespace

LambdaReport check_lambda_sequence(const LambdaSequence& seq, int horizon,
                                   double tolerance) {
  if (horizon < 2) throw InvalidArgument("horizon must be at least 2");
  const int h = std::min(horizon, seq.size());
  const int half = std::max(1, h / 2);
  double s1 = 0.0, s2 = 0.0, s1_half = 0.0, s2_half = 0.0;
  for (int n = 1; n <= h; ++n) {
    const double inv = 1.0 / seq.value(n);
    s1 += inv * inv;
    if (n < h) {
      const double r = seq.ratio(n + 1, n);
      // |l_n - l_{n+1}|^2 / (l_n^2 + l_{n+1}^2) in ratio form
      s2 += (1.0 - r) * (1.0 - r) / (1.0 + r * r);
    }
    if (n == half) {
      s1_half = s1;
      s2_half = s2;
    }
  }
  LambdaReport rep{s1, s1_half, s2, s2_half, false, false, h};
  rep.first_converges = std::abs(s1 - s1_half) < tolerance;
  rep.second_converges = std::abs(s2 - s2_half) < tolerance;
  return rep;
}

}  // namespace cpflow
