#pragma once

#include <cstddef>
#include <vector>

#include "opsplit/operators.hpp"
#include "opsplit/space.hpp"
#include "opsplit/splitting.hpp"

namespace opsplit {

/// 0 in sum_i A_i x + B x + C x on R^dim, with product-space weights w.
struct MOperatorProblem {
  std::vector<ResolventOperator> a;
  ForwardOperator b;
  CocoerciveOperator c;
  WeightVector w;
  std::size_t dim;

  std::size_t m() const noexcept { return a.size(); }
  void validate() const;
};

/// One block per maximally monotone operator, all of the base dimension.
using LiftedPoint = std::vector<Vector>;

LiftedPoint lift(const Vector& x, std::size_t m);

/// Every block becomes sum_i w_i p_i.
LiftedPoint project_diagonal(const WeightVector& w, const LiftedPoint& p);

/// Block i becomes A_i.resolve(gamma / w_i, p_i).
LiftedPoint lifted_resolvent(const std::vector<ResolventOperator>& a, const WeightVector& w,
                             double gamma, const LiftedPoint& p);

// Operators on flat R^(m*dim), used to run the two-operator algorithms on the
// lifted problem. Inner products there are the w-weighted ones.

/// Normal cone of the diagonal subspace; its resolvent is the diagonal projection.
ResolventOperator diagonal_normal_cone(const WeightVector& w, std::size_t dim);
ResolventOperator lifted_resolvent_operator(const std::vector<ResolventOperator>& a,
                                            const WeightVector& w, std::size_t dim);
/// Applies the base operator block by block; constants carry over.
ForwardOperator lifted_forward(const ForwardOperator& b, std::size_t m, std::size_t dim);
CocoerciveOperator lifted_cocoercive(const CocoerciveOperator& c, std::size_t m, std::size_t dim);

/// The equivalent four-operator problem on R^(m*dim). The diagonal normal
/// cone takes the slot of the first resolvent step of each method: A1 for the
/// bsfrb/bsrfb families and A2 for the sfrdr family.
FourOperatorProblem lifted_problem(const MOperatorProblem& p, Algorithm alg);

/// Weighted metric on flat lifted vectors.
Metric product_metric(const MOperatorProblem& p);

struct MSplitState {
  std::vector<Vector> z, y, y_prev;
  std::vector<Vector> b_prev;  // B(y_prev_i); unused by the reflected variant
  std::size_t n = 0;
};

struct MSfrdrState {
  Vector x, x_prev;
  Vector b_prev;  // B(x_prev)
  std::vector<Vector> u;
  std::size_t n = 0;
};

/// Each argument may be empty (zeros), of the base dimension (replicated
/// over blocks) or of length m*dim (split into blocks).
MSplitState make_m_split_state(const MOperatorProblem& p, Algorithm alg, const Vector& z0 = {},
                               const Vector& y0 = {}, const Vector& y_prev = {});
MSfrdrState make_m_sfrdr_state(const MOperatorProblem& p, const Vector& x0 = {},
                               const Vector& u0 = {}, const Vector& x_prev = {});

/// Resolvent inputs of the step are written to `inputs` when given.
/// Returns x_{n+1} = sum_j w_j z_{j,n}.
Vector step_m_bsfrb(const MOperatorProblem& p, MSplitState& s, double gamma,
                    std::vector<Vector>* inputs = nullptr);
Vector step_m_bsrfb(const MOperatorProblem& p, MSplitState& s, double gamma,
                    std::vector<Vector>* inputs = nullptr);
/// Returns the blocks y_{i,n+1}.
std::vector<Vector> step_m_sfrdr(const MOperatorProblem& p, MSfrdrState& s, double gamma,
                                 double lambda, std::vector<Vector>* inputs = nullptr);

/// Lifted states matching the direct ones, for the product-space form.
BsfrbState to_lifted_bsfrb(const MOperatorProblem& p, const MSplitState& s);
BsrfbState to_lifted_bsrfb(const MSplitState& s);
SfrdrState to_lifted_sfrdr(const MOperatorProblem& p, const MSfrdrState& s);

/// Elements a_i in A_i(y_i) recovered from one trial step on a copy of the
/// state: a_i = w_i (t_i - y_i) / gamma with t_i the resolvent input (lambda
/// replaces gamma for the sfrdr family). At a solution their sum equals
/// -(B x + C x).
std::vector<Vector> implied_subgradients(const MOperatorProblem& p, Algorithm alg,
                                         const MSplitState& s, double gamma);
std::vector<Vector> implied_subgradients(const MOperatorProblem& p, const MSfrdrState& s,
                                         double gamma, double lambda);

/// Runs a product-space algorithm. The monitored sequence is x_n of the base
/// space; residuals and Lyapunov values use the weighted metric on the
/// lifted iterates. Final states are flattened block by block.
RunTrace run_m(const MOperatorProblem& p, const SolverParams& params, const InitialState& init,
               const RunOptions& options);

/// Lifted anchor (flat vectors of length m*dim) from a high-accuracy solve.
LyapunovAnchor presolve_anchor_m(const MOperatorProblem& p, const SolverParams& params,
                                 double tolerance, std::size_t max_iter);

}  // namespace opsplit
