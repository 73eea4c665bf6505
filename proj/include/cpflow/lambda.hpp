#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "cpflow/types.hpp"

namespace cpflow {

enum class LambdaKind { Linear, Geometric, Custom };

// How position j beyond the explicit head acts on the reference vectors.
//   Identity      : I
//   Mult          : exp(-p x) 1_[lo,hi)
//   RefRank       : |k_{j - ket_shift}><k_{j - bra_shift}|
enum class TailKind { Identity, Mult, RefRank };

struct TailRule {
  TailKind kind = TailKind::Identity;
  double p = 0.0;
  double lo = 0.0;
  double hi = kInf;
  int ket_shift = 0;
  int bra_shift = 0;

  static TailRule identity() { return {}; }
  static TailRule mult(double p, double lo = 0.0, double hi = kInf) {
    return {TailKind::Mult, p, lo, hi, 0, 0};
  }
  static TailRule ref_rank(int ket_shift, int bra_shift) {
    return {TailKind::RefRank, 0.0, 0.0, kInf, ket_shift, bra_shift};
  }
  // the rule seen from a tensor shifted right by n positions
  TailRule shifted(int n) const {
    auto r = *this;
    if (kind == TailKind::RefRank) {
      r.ket_shift += n;
      r.bra_shift += n;
    }
    return r;
  }
  // smallest position where the rule is defined
  int first_valid_position() const {
    return kind == TailKind::RefRank ? std::max(ket_shift, bra_shift) + 1 : 1;
  }
};

struct LambdaReport {
  double sum_inverse_squares;
  double sum_inverse_squares_half;
  double sum_differences;
  double sum_differences_half;
  bool first_converges;
  bool second_converges;
  int horizon;
};

class LambdaSequence {
 public:
  static LambdaSequence linear();
  static LambdaSequence geometric();
  static LambdaSequence custom(std::vector<double> values);

  LambdaKind kind() const { return kind_; }
  std::string name() const;
  // lambda_j for j >= 1; may be +inf for large geometric j
  double value(int j) const;
  // lambda_i / lambda_j without overflow
  double ratio(int i, int j) const;
  // largest index with a defined value (INT_MAX unless custom)
  int size() const;
  bool truncated_tail() const { return kind_ == LambdaKind::Custom; }

  // (k_{j+oF}, R_j k_{j+oG}) for a tail position j; always real
  double tail_factor(const TailRule& rule, int j, int oF, int oG) const;

  // prod_{j >= from} of tail factors (infinite, Neville in 1/M for the log-sum)
  double tail_product(const TailRule& rule, int from, int oF, int oG) const;
  // prod_{from <= j <= to}
  double partial_product(const TailRule& rule, int from, int to, int oF,
                         int oG) const;

  struct Cache;  // tail tables, shared between copies

 private:
  LambdaSequence(LambdaKind kind, std::vector<double> values);
  LambdaKind kind_;
  std::vector<double> values_;
  std::shared_ptr<Cache> cache_;
};

LambdaReport check_lambda_sequence(const LambdaSequence& seq, int horizon = 10000,
                                   double tolerance = 1e-3);

}  // namespace cpflow
