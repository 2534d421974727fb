#include "wsvm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsvm {

namespace {

void push_term(kernels::TermMap& t, std::size_t i0, double c0, std::ptrdiff_t i1 = -1,
               double c1 = 0.0) {
  t.item0.push_back(static_cast<std::int32_t>(i0));
  t.coef0.push_back(c0);
  t.item1.push_back(static_cast<std::int32_t>(i1));
  t.coef1.push_back(c1);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

}  // namespace

DualProblem DualProblem::classification(std::shared_ptr<const KernelMatrix> k,
                                        std::span<const double> labels, double ridge) {
  if (labels.size() != k->size())
    throw ArgumentError("classification problem: label count differs from kernel size");
  DualProblem pr;
  pr.kind_ = ProblemKind::classification;
  pr.kernel_ = std::move(k);
  pr.ridge_ = ridge;
  pr.instances_ = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw ArgumentError("classification labels must be -1 or +1 (index " +
                          std::to_string(i) + ")");
    push_term(pr.terms_, i, labels[i]);
    pr.y_.push_back(labels[i]);
    pr.p_.push_back(1.0);
  }
  return pr;
}

DualProblem DualProblem::regression(std::shared_ptr<const KernelMatrix> k,
                                    std::span<const double> targets, double epsilon,
                                    double ridge) {
  if (targets.size() != k->size())
    throw ArgumentError("regression problem: target count differs from kernel size");
  if (!(epsilon >= 0.0)) throw ArgumentError("regression problem: epsilon must be >= 0");
  DualProblem pr;
  pr.kind_ = ProblemKind::regression;
  pr.kernel_ = std::move(k);
  pr.ridge_ = ridge;
  pr.epsilon_ = epsilon;
  const std::size_t n = targets.size();
  pr.instances_ = n;
  for (std::size_t i = 0; i < n; ++i) {
    push_term(pr.terms_, i, 1.0);
    pr.y_.push_back(1.0);
    pr.p_.push_back(targets[i] - epsilon);
  }
  for (std::size_t i = 0; i < n; ++i) {
    push_term(pr.terms_, i, -1.0);
    pr.y_.push_back(-1.0);
    pr.p_.push_back(-targets[i] - epsilon);
  }
  pr.default_bias_ = median(std::vector<double>(targets.begin(), targets.end()));
  return pr;
}

DualProblem DualProblem::ranking(std::shared_ptr<const KernelMatrix> k,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                 double ridge) {
  DualProblem pr;
  pr.kind_ = ProblemKind::ranking;
  pr.kernel_ = std::move(k);
  pr.ridge_ = ridge;
  pr.has_bias_ = false;
  pr.instances_ = pairs.size();
  for (const auto& [i, j] : pairs) {
    if (i >= pr.kernel_->size() || j >= pr.kernel_->size() || i == j)
      throw ArgumentError("ranking problem: invalid pair");
    push_term(pr.terms_, i, 1.0, static_cast<std::ptrdiff_t>(j), -1.0);
    pr.y_.push_back(0.0);
    pr.p_.push_back(1.0);
  }
  return pr;
}

double DualProblem::q(std::size_t v, std::size_t w) const {
  const auto& t = terms_;
  auto kk = [&](std::int32_t a, std::int32_t b) {
    return (*kernel_)(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  };
  double s = t.coef0[v] * t.coef0[w] * kk(t.item0[v], t.item0[w]);
  if (t.item1[w] >= 0) s += t.coef0[v] * t.coef1[w] * kk(t.item0[v], t.item1[w]);
  if (t.item1[v] >= 0) {
    s += t.coef1[v] * t.coef0[w] * kk(t.item1[v], t.item0[w]);
    if (t.item1[w] >= 0) s += t.coef1[v] * t.coef1[w] * kk(t.item1[v], t.item1[w]);
  }
  if (v == w) s += ridge_;
  return s;
}

void DualProblem::add_item_row(std::size_t v, double a, std::span<double> out) const {
  const auto& t = terms_;
  const KernelRow r0 = kernel_->row(static_cast<std::size_t>(t.item0[v]));
  kernels::axpy_parallel(a * t.coef0[v], r0.span(), out);
  if (t.item1[v] >= 0) {
    const KernelRow r1 = kernel_->row(static_cast<std::size_t>(t.item1[v]));
    kernels::axpy_parallel(a * t.coef1[v], r1.span(), out);
  }
}

void DualProblem::q_row(std::size_t v, std::span<double> out,
                        std::span<double> scratch) const {
  std::fill(scratch.begin(), scratch.end(), 0.0);
  add_item_row(v, 1.0, scratch);
  kernels::gather_parallel(terms_, scratch, out);
  out[v] += ridge_;
}

std::vector<double> DualProblem::dense_q() const {
  const std::size_t n = size();
  std::vector<double> qd(n * n), scratch(items());
  for (std::size_t v = 0; v < n; ++v)
    q_row(v, std::span<double>(qd.data() + v * n, n), scratch);
  return qd;
}

std::vector<double> DualProblem::item_scores(std::span<const double> alpha) const {
  std::vector<double> f(items(), 0.0);
  for (std::size_t v = 0; v < size(); ++v) {
    if (alpha[v] != 0.0) add_item_row(v, alpha[v], f);
  }
  return f;
}

std::vector<double> DualProblem::q_times(std::span<const double> alpha) const {
  const std::vector<double> f = item_scores(alpha);
  std::vector<double> out(size());
  kernels::gather_parallel(terms_, f, out);
  for (std::size_t v = 0; v < size(); ++v) out[v] += ridge_ * alpha[v];
  return out;
}

void DualProblem::flip_label(std::size_t v) {
  if (kind_ != ProblemKind::classification)
    throw ArgumentError("flip_label applies to classification problems only");
  terms_.coef0[v] = -terms_.coef0[v];
  y_[v] = -y_[v];
}

std::vector<double> DualProblem::combine(std::span<const double> alpha) const {
  if (kind_ != ProblemKind::regression) return {alpha.begin(), alpha.end()};
  const std::size_t n = instances_;
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = alpha[i] - alpha[n + i];
  return a;
}

std::vector<double> expand_weights(const DualProblem& prob, std::span<const double> c) {
  if (c.size() != prob.instances())
    throw ArgumentError("weight vector length " + std::to_string(c.size()) +
                        " differs from instance count " + std::to_string(prob.instances()));
  for (double v : c) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ArgumentError("weights must be finite and nonnegative");
  }
  std::vector<double> out(c.begin(), c.end());
  if (prob.kind() == ProblemKind::regression) out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace wsvm
