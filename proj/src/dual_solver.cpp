#include "fbcap/dual_solver.hpp"

#include "fbcap/numeric_util.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kLambdaFloor = 1e-12;   // clamp inside iterations
constexpr double kR2Floor = 1e-140;      // keeps 1/nu finite along the line search
constexpr double kKinkDropRatio = 1e-7;  // |(c,s)|/scale below this counts as on the kink
constexpr double kKinkPinRatio = 1e-3;   // stall-activation radius for pinning points
constexpr double kInf = std::numeric_limits<double>::infinity();

// Precomputed cos(k theta_i), sin(k theta_i) tables, k = 1..h.
struct Basis {
    MatrixXd A;  // h x 2m
    MatrixXd B;
};

Basis make_basis(const FrequencyGrid& grid) {
    Basis b;
    b.A.resize(grid.h, grid.size());
    b.B.resize(grid.h, grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        for (int k = 1; k <= grid.h; ++k) {
            b.A(k - 1, i) = std::cos(k * grid.thetas(i));
            b.B(k - 1, i) = std::sin(k * grid.thetas(i));
        }
    }
    return b;
}

// Per-point quantities. The stationary path evaluates nu through conjugate
// rearrangements so t = 2*lambda*Sw - nu never suffers cancellation:
//   R = sqrt(r^2) sqrt(r^2 + 8 lambda Sw),
//   nu = 4 lambda Sw r^2 / (r^2 + R),
//   t = 16 lambda^2 Sw^2 r^2 / (r^2 + R)^2,
//   r^2/(2 nu) = (r^2 + R) / (8 lambda Sw).
struct Core {
    double c = 0, s = 0, r2 = 0, nu = 0, t = 0, r2_over_2nu = 0;
};

bool core_stationary(double lambda, double sw, double c, double s, Core& out) {
    const double r2 = c * c + s * s;
    if (!(lambda > 0.0) || !(r2 > kR2Floor)) return false;
    const double R = std::sqrt(r2) * std::sqrt(r2 + 8.0 * lambda * sw);
    const double denom = r2 + R;
    out.c = c;
    out.s = s;
    out.r2 = r2;
    out.nu = 4.0 * lambda * sw * r2 / denom;
    out.t = 16.0 * lambda * lambda * sw * sw * r2 / (denom * denom);
    out.r2_over_2nu = denom / (8.0 * lambda * sw);
    return std::isfinite(out.t) && out.t > 0.0;
}

bool core_explicit(double lambda, double sw, double c, double s, double nu, Core& out) {
    const double t = 2.0 * lambda * sw - nu;
    if (!(nu > 0.0) || !(t > 0.0)) return false;
    out.c = c;
    out.s = s;
    out.r2 = c * c + s * s;
    out.nu = nu;
    out.t = t;
    out.r2_over_2nu = out.r2 / (2.0 * nu);
    return true;
}

double point_value(const Core& k, double lambda, double sw) {
    return 0.5 * std::log(k.t) + 0.5 - k.r2_over_2nu + lambda * sw;
}

// x layout: x(0) = lambda, x(1..h) = eta, x(h+1) = eta0.
struct Eval {
    bool ok = false;
    double value = -kInf;
    VectorXd grad;      // d g / d x
    MatrixXd hess;      // reduced mode: Schur-corrected Hessian; joint mode: raw H_xx
    // joint-mode per-point second-order pieces (before the 1/2m factor)
    VectorXd gnu_raw;   // d g / d nu_i
    VectorXd dnn_raw;   // d^2 g / d nu_i^2
    MatrixXd hxnu_raw;  // d^2 g / dx dnu_i columns
    // reduced-mode kink bookkeeping: the direction-carrying part of each point's
    // x-gradient, and |(c,s)| relative to its natural scale 2*lambda*Sw
    MatrixXd kink_raw;
    VectorXd kink_ratio;
};

enum class Want { kValue, kDerivatives };

// Evaluates g_m (and derivatives) at x. nu_explicit == nullptr selects the
// stationary closed form; in that mode, points flagged in `pinned` are evaluated in
// their exact kink limit r^2 = 0 (value 1/2 log(2 lambda Sw) + 1/2 + lambda Sw).
// Grid sums use a deterministic pairwise tree.
Eval evaluate(const FrequencyGrid& grid, const Basis& basis, const VectorXd& x,
              const VectorXd* nu_explicit, double P, Want want,
              const std::vector<char>* pinned = nullptr) {
    const int h = grid.h;
    const int n = h + 2;
    const int points = grid.size();
    const double lambda = x(0);
    const double eta0 = x(n - 1);
    Eval out;
    if (!(lambda > 0.0)) return out;

    struct Acc {
        double v = 0.0;
        VectorXd g;
        MatrixXd H;
        Acc& operator+=(const Acc& o) {
            v += o.v;
            if (o.g.size()) g += o.g;
            if (o.H.size()) H += o.H;
            return *this;
        }
    };

    const bool reduced = nu_explicit == nullptr;
    if (want == Want::kDerivatives) {
        if (reduced) {
            out.kink_raw = MatrixXd::Zero(n, points);
            out.kink_ratio = VectorXd::Zero(points);
        } else {
            out.gnu_raw.resize(points);
            out.dnn_raw.resize(points);
            out.hxnu_raw.resize(n, points);
        }
    }

    bool feasible = true;
    auto term = [&](int i) -> Acc {
        Acc a;
        if (want == Want::kDerivatives) {
            a.g = VectorXd::Zero(n);
            a.H = MatrixXd::Zero(n, n);
        }
        if (!feasible) return a;
        const double sw = grid.sw(i);

        if (reduced && pinned && (*pinned)[static_cast<size_t>(i)]) {
            a.v = 0.5 * std::log(2.0 * lambda * sw) + 0.5 + lambda * sw;
            if (want == Want::kDerivatives) {
                a.g(0) = 0.5 / lambda + sw;
                a.H(0, 0) = -0.5 / (lambda * lambda);
            }
            return a;
        }

        const double c = 2.0 * lambda * sw + (h ? basis.A.col(i).dot(x.segment(1, h)) : 0.0) + eta0;
        const double s = h ? basis.B.col(i).dot(x.segment(1, h)) : 0.0;
        Core k;
        const bool ok = reduced ? core_stationary(lambda, sw, c, s, k)
                                : core_explicit(lambda, sw, c, s, (*nu_explicit)(i), k);
        if (!ok) {
            feasible = false;
            return a;
        }
        a.v = point_value(k, lambda, sw);
        if (want == Want::kDerivatives) {
            VectorXd grad_c = VectorXd::Zero(n);  // c is affine in x
            grad_c(0) = 2.0 * sw;
            if (h) grad_c.segment(1, h) = basis.A.col(i);
            grad_c(n - 1) = 1.0;
            VectorXd grad_s = VectorXd::Zero(n);
            if (h) grad_s.segment(1, h) = basis.B.col(i);

            const VectorXd mix = k.c * grad_c + k.s * grad_s;  // 0.5 * dr2/dx
            a.g = -mix / k.nu;
            a.g(0) += sw / k.t + sw;

            a.H = -(grad_c * grad_c.transpose() + grad_s * grad_s.transpose()) / k.nu;
            a.H(0, 0) -= 2.0 * sw * sw / (k.t * k.t);

            VectorXd hxn = mix / (k.nu * k.nu);
            hxn(0) += sw / (k.t * k.t);
            const double dnn = -0.5 / (k.t * k.t) - k.r2 / (k.nu * k.nu * k.nu);

            if (reduced) {
                a.H -= hxn * hxn.transpose() / dnn;  // exact Schur correction for nu*(x)
                out.kink_raw.col(i) = -mix / k.nu;
                out.kink_ratio(i) = std::sqrt(k.r2) / (2.0 * lambda * sw);
            } else {
                out.gnu_raw(i) = -0.5 / k.t + k.r2 / (2.0 * k.nu * k.nu);
                out.dnn_raw(i) = dnn;
                out.hxnu_raw.col(i) = hxn;
            }
        }
        return a;
    };

    Acc total = pairwise_sum<Acc>(0, points, term);
    if (!feasible) return out;

    const double scale = 1.0 / points;  // 1/(2m)
    out.ok = true;
    out.value = total.v * scale - lambda * P + eta0;
    if (want == Want::kDerivatives) {
        out.grad = total.g * scale;
        out.grad(0) -= P;
        out.grad(n - 1) += 1.0;
        out.hess = total.H * scale;
    }
    return out;
}

double projected_sup_norm(const VectorXd& grad, double lambda) {
    double sup = 0.0;
    for (int i = 0; i < grad.size(); ++i) {
        double gi = grad(i);
        if (i == 0 && lambda <= 2.0 * kLambdaFloor && gi < 0.0) gi = 0.0;
        sup = std::max(sup, std::abs(gi));
    }
    return sup;
}

void check_domain(const DualPoint& dp, const FrequencyGrid& grid) {
    if (dp.eta.size() != grid.h || dp.nu.size() != grid.size())
        throw std::invalid_argument("dual point does not match the grid dimensions");
    if (!(dp.lambda >= 0.0)) throw std::domain_error("infeasible dual point");
    for (int i = 0; i < grid.size(); ++i) {
        if (!(dp.nu(i) > 0.0) || !(dp.nu(i) < 2.0 * dp.lambda * grid.sw(i)))
            throw std::domain_error("infeasible dual point");
    }
}

}  // namespace

double nu_closed_form(double r2, double lambda, double sw) {
    if (r2 < 0.0 || lambda < 0.0 || sw <= 0.0)
        throw std::invalid_argument("nu_closed_form: arguments out of range");
    if (r2 == 0.0 || lambda == 0.0) return 0.0;
    const double R = std::sqrt(r2) * std::sqrt(r2 + 8.0 * lambda * sw);
    return 4.0 * lambda * sw * r2 / (r2 + R);
}

double eval_gm(const DualPoint& dp, const FrequencyGrid& grid, double P) {
    check_domain(dp, grid);
    const int h = grid.h;
    VectorXd x(h + 2);
    x(0) = dp.lambda;
    if (h) x.segment(1, h) = dp.eta;
    x(h + 1) = dp.eta0;
    const Basis basis = make_basis(grid);
    const Eval e = evaluate(grid, basis, x, &dp.nu, P, Want::kValue);
    if (!e.ok) throw std::domain_error("infeasible dual point");
    return e.value;
}

VectorXd grad_gm(const DualPoint& dp, const FrequencyGrid& grid, double P) {
    check_domain(dp, grid);
    const int h = grid.h;
    const int n = h + 2;
    VectorXd x(n);
    x(0) = dp.lambda;
    if (h) x.segment(1, h) = dp.eta;
    x(n - 1) = dp.eta0;
    const Basis basis = make_basis(grid);
    const Eval e = evaluate(grid, basis, x, &dp.nu, P, Want::kDerivatives);
    if (!e.ok) throw std::domain_error("infeasible dual point");
    VectorXd g(n + grid.size());
    g.head(n) = e.grad;
    g.tail(grid.size()) = e.gnu_raw / grid.size();
    return g;
}

// ---------------------------------------------------------------------------
// solve_dual
//
// Damped Newton with a vanishing log-barrier on lambda. Two subtleties:
//
//  * Joint mode (eliminate_nu = false) runs an interior-point continuation with
//    barriers on nu_i > 0 and 2 lambda Sw_i - nu_i > 0; the nu block is eliminated
//    exactly through its diagonal Schur complement each step.
//
//  * The reduced objective x -> g_m(x, nu*(x)) is concave but has conical kinks on
//    the surfaces (c_i, s_i) = 0. Degenerate instances (flat spectra, vanishing
//    power) attain their optimum there, where no smooth gradient vanishes. When the
//    smooth iteration stalls near such a surface, the points are pinned to it (the
//    constraints are linear) and the step switches to equality-constrained Newton;
//    optimality is then certified by the tangential gradient together with KKT
//    multipliers lying inside the subdifferential's per-point radius
//    1/(2m sqrt(2 lambda Sw_i)).
// ---------------------------------------------------------------------------
DualSolution solve_dual(const FrequencyGrid& grid, double P, const SolverSettings& settings) {
    if (!(P > 0.0)) throw std::invalid_argument("solve_dual: P must be positive");
    if (settings.max_iter < 1 || !(settings.tol_grad > 0.0))
        throw std::invalid_argument("solve_dual: invalid settings");

    const int h = grid.h;
    const int n = h + 2;
    const int points = grid.size();
    const Basis basis = make_basis(grid);
    const bool reduced = settings.eliminate_nu;
    const bool flat = grid.sw.maxCoeff() - grid.sw.minCoeff() <= 1e-12 * grid.sw.maxCoeff();
    const bool trace = std::getenv("FBCAP_SOLVER_TRACE") != nullptr;

    // Strictly feasible, scale-matched start.
    VectorXd x = VectorXd::Zero(n);
    x(0) = 1.0 / (2.0 * grid.sw.mean());
    VectorXd nu(points);
    for (int i = 0; i < points; ++i) {
        const double c = 2.0 * x(0) * grid.sw(i);
        nu(i) = nu_closed_form(c * c, x(0), grid.sw(i));
    }

    auto assemble = [&](const VectorXd& xi, const VectorXd& nui, double value, int iters,
                        double cert) {
        DualSolution sol;
        sol.point.lambda = xi(0);
        sol.point.eta = xi.segment(1, h);
        sol.point.eta0 = xi(n - 1);
        if (reduced) {
            sol.point.nu.resize(points);
            for (int i = 0; i < points; ++i) {
                const double c = 2.0 * xi(0) * grid.sw(i) +
                                 (h ? basis.A.col(i).dot(xi.segment(1, h)) : 0.0) + xi(n - 1);
                const double s = h ? basis.B.col(i).dot(xi.segment(1, h)) : 0.0;
                sol.point.nu(i) = nu_closed_form(c * c + s * s, xi(0), grid.sw(i));
            }
        } else {
            sol.point.nu = nui;
        }
        sol.value_nats = value;
        sol.iterations = iters;
        sol.certificate = cert;
        sol.flat_spectrum_warning = flat;
        return sol;
    };

    // The default (eliminated) mode needs only a vanishing barrier on lambda; the
    // joint mode runs a genuine interior-point continuation to keep (nu, t) centered.
    double mu = reduced ? settings.barrier_init : std::max(settings.barrier_init, 0.1);
    const double shrink = settings.barrier_shrink;

    std::vector<char> pinned(static_cast<size_t>(points), 0);
    int pinned_count = 0;
    int toggle_budget = 32;
    int creep_streak = 0;

    double best_value = -kInf;
    VectorXd best_x = x, best_nu = nu;
    double best_cert = kInf;

    auto barrier_value = [&](const VectorXd& xi, const VectorXd& nui, double value) {
        if (mu == 0.0) return value;
        double b = std::log(xi(0));
        if (!reduced) {
            double acc = 0.0;
            for (int i = 0; i < points; ++i) {
                const double t = 2.0 * xi(0) * grid.sw(i) - nui(i);
                acc += std::log(nui(i)) + std::log(t);
            }
            b += acc / points;
        }
        return value + mu * b;
    };

    auto value_at = [&](const VectorXd& xi, const VectorXd* nui) -> double {
        const Eval e = evaluate(grid, basis, xi, nui, P, Want::kValue, &pinned);
        return e.ok ? e.value : -kInf;
    };

    // Rows of the active kink constraints E x = 0 (all linear homogeneous), and the
    // per-row subdifferential radii for the multiplier validity check.
    auto build_constraints = [&](MatrixXd& E, std::vector<double>& radius) {
        std::vector<VectorXd> rows;
        radius.clear();
        for (int i = 0; i < points; ++i) {
            if (!pinned[static_cast<size_t>(i)]) continue;
            const double kappa =
                1.0 / (points * std::sqrt(2.0 * x(0) * grid.sw(i)));
            VectorXd rc = VectorXd::Zero(n);
            rc(0) = 2.0 * grid.sw(i);
            if (h) rc.segment(1, h) = basis.A.col(i);
            rc(n - 1) = 1.0;
            rows.push_back(rc);
            radius.push_back(kappa);
            if (h) {
                VectorXd rs = VectorXd::Zero(n);
                rs.segment(1, h) = basis.B.col(i);
                if (rs.norm() > 1e-14) {
                    rows.push_back(rs);
                    radius.push_back(kappa);
                }
            }
        }
        E.resize(static_cast<int>(rows.size()), n);
        for (int r = 0; r < E.rows(); ++r) E.row(r) = rows[static_cast<size_t>(r)];
    };

    int iter = 0;
    for (; iter < settings.max_iter; ++iter) {
        const Eval e = evaluate(grid, basis, x, reduced ? nullptr : &nu, P,
                                Want::kDerivatives, &pinned);
        if (!e.ok) throw SolverError("solve_dual: iterate left the feasible region",
                                     assemble(best_x, best_nu, best_value, iter, best_cert));

        MatrixXd E;
        std::vector<double> radius;
        VectorXd multipliers;
        bool multipliers_valid = false;
        double cert;
        if (reduced) {
            if (pinned_count == 0) {
                cert = projected_sup_norm(e.grad, x(0));
                // Zero is a valid subgradient element at points sitting on the kink.
                VectorXd adjusted = e.grad;
                bool any = false;
                for (int i = 0; i < points; ++i) {
                    if (e.kink_ratio(i) > 0.0 && e.kink_ratio(i) <= kKinkDropRatio) {
                        adjusted -= e.kink_raw.col(i) / points;
                        any = true;
                    }
                }
                if (any) cert = std::min(cert, projected_sup_norm(adjusted, x(0)));
            } else {
                build_constraints(E, radius);
                // Tangential gradient through an orthonormal null-space basis of the
                // active rows, and minimum-norm multipliers g ~ E' mu for validity.
                // Symmetric grid points contribute rows identical up to rounding, so
                // the rank decisions need an explicit threshold.
                Eigen::ColPivHouseholderQR<MatrixXd> qr;
                qr.setThreshold(1e-10);
                qr.compute(E.transpose());
                const int rank = static_cast<int>(qr.rank());
                const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
                cert = rank < n
                           ? (Q.rightCols(n - rank).transpose() * e.grad).cwiseAbs().maxCoeff()
                           : 0.0;
                Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
                cod.setThreshold(1e-10);
                cod.compute(E.transpose());
                multipliers = cod.solve(e.grad);
                multipliers_valid = true;
                for (int r = 0; r < E.rows(); ++r) {
                    if (std::abs(multipliers(r)) > 1.1 * radius[static_cast<size_t>(r)] + 1e-10)
                        multipliers_valid = false;
                }
                if (trace) {
                    std::fprintf(stderr, "  [mult:");
                    for (int r = 0; r < E.rows(); ++r)
                        std::fprintf(stderr, " %.4g/%.4g", multipliers(r),
                                     radius[static_cast<size_t>(r)]);
                    std::fprintf(stderr, " valid=%d cert=%.3e]\n", multipliers_valid ? 1 : 0, cert);
                }
            }
        } else {
            cert = projected_sup_norm(e.grad, x(0));
            for (int i = 0; i < points; ++i) {
                double gi = e.gnu_raw(i) / points;
                if (nu(i) <= 1e-10 * 2.0 * x(0) * grid.sw(i) && gi < 0.0) gi = 0.0;
                cert = std::max(cert, std::abs(gi));
            }
        }

        if (e.value > best_value) {
            best_value = e.value;
            best_x = x;
            best_nu = nu;
            best_cert = cert;
        }
        if (mu == 0.0 && cert <= settings.tol_grad) {
            if (pinned_count == 0) return assemble(x, nu, e.value, iter, cert);
            if (multipliers_valid) return assemble(x, nu, e.value, iter, cert);
            // Constrained stationary point whose multipliers exceed the kink radius:
            // those surfaces are not truly active; release them and continue.
            if (toggle_budget-- <= 0) break;
            std::fill(pinned.begin(), pinned.end(), 0);
            pinned_count = 0;
            if (trace) std::fprintf(stderr, "  [release: invalid multipliers, budget %d]\n", toggle_budget);
            continue;
        }

        // Barrier-augmented derivatives.
        VectorXd g_mu = e.grad;
        MatrixXd H_mu = e.hess;
        VectorXd gnu = e.gnu_raw;
        VectorXd dnn = e.dnn_raw;
        MatrixXd hxn = e.hxnu_raw;
        if (mu > 0.0) {
            g_mu(0) += mu / x(0);
            H_mu(0, 0) -= mu / (x(0) * x(0));
            if (!reduced) {
                for (int i = 0; i < points; ++i) {
                    const double sw = grid.sw(i);
                    const double t = 2.0 * x(0) * sw - nu(i);
                    g_mu(0) += mu * (2.0 * sw / t) / points;
                    H_mu(0, 0) -= mu * (4.0 * sw * sw / (t * t)) / points;
                    gnu(i) += mu * (1.0 / nu(i) - 1.0 / t);
                    dnn(i) -= mu * (1.0 / (nu(i) * nu(i)) + 1.0 / (t * t));
                    hxn(0, i) += mu * (2.0 * sw / (t * t));
                }
            }
        }

        // Stage control: once the barrier-augmented problem is solved to the current
        // weight, shrink the weight.
        if (mu > 0.0) {
            double cert_mu;
            if (reduced && pinned_count > 0) {
                Eigen::ColPivHouseholderQR<MatrixXd> qr;
                qr.setThreshold(1e-10);
                qr.compute(E.transpose());
                const int rank = static_cast<int>(qr.rank());
                const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
                cert_mu = rank < n
                              ? (Q.rightCols(n - rank).transpose() * g_mu).cwiseAbs().maxCoeff()
                              : 0.0;
            } else {
                cert_mu = projected_sup_norm(g_mu, x(0));
                if (!reduced) cert_mu = std::max(cert_mu, gnu.cwiseAbs().maxCoeff() / points);
            }
            if (cert_mu <= std::max(settings.tol_grad, mu)) {
                mu = mu <= 1e-16 ? 0.0 : mu * shrink;
                continue;
            }
        }

        // Newton direction. In joint mode the nu block enters through its diagonal
        // Schur complement; with pinned points the step solves the KKT system of the
        // linear constraints E (x + dx) = 0.
        MatrixXd S = H_mu;
        VectorXd rhs = g_mu;
        if (!reduced) {
            for (int i = 0; i < points; ++i) {
                S -= hxn.col(i) * hxn.col(i).transpose() / dnn(i) / points;
                rhs -= hxn.col(i) * (gnu(i) / dnn(i)) / points;
            }
        }
        VectorXd dx;
        bool newton_ok = false;
        if (reduced && pinned_count > 0 && E.rows() > 0) {
            const int r = static_cast<int>(E.rows());
            MatrixXd kkt = MatrixXd::Zero(n + r, n + r);
            kkt.topLeftCorner(n, n) = -S;
            kkt.topRightCorner(n, r) = E.transpose();
            kkt.bottomLeftCorner(r, n) = E;
            VectorXd krhs(n + r);
            krhs.head(n) = rhs;
            krhs.tail(r) = -E * x;
            const VectorXd sol = kkt.fullPivLu().solve(krhs);
            dx = sol.head(n);
            newton_ok = dx.allFinite();
        } else {
            Eigen::LDLT<MatrixXd> ldlt(-S);
            if (ldlt.info() == Eigen::Success) {
                dx = ldlt.solve(rhs);
                newton_ok = dx.allFinite();
            }
            if (!newton_ok) {
                MatrixXd reg = -S;
                const double ridge = 1e-8 * (1.0 + reg.diagonal().cwiseAbs().maxCoeff());
                reg.diagonal().array() += ridge;
                Eigen::LDLT<MatrixXd> ldlt2(reg);
                if (ldlt2.info() == Eigen::Success) {
                    dx = ldlt2.solve(rhs);
                    newton_ok = dx.allFinite();
                }
            }
        }
        if (!newton_ok) dx = g_mu / (1.0 + g_mu.norm());

        VectorXd dnu = VectorXd::Zero(points);
        if (!reduced) {
            for (int i = 0; i < points; ++i)
                dnu(i) = (-gnu(i) - hxn.col(i).dot(dx)) / dnn(i);
        }
        double slope = g_mu.dot(dx);
        if (!reduced) slope += gnu.dot(dnu) / points;
        if (!(slope > 0.0) && !(reduced && pinned_count > 0)) {
            dx = g_mu / (1.0 + g_mu.norm());  // not an ascent pair; plain ascent
            if (!reduced) {
                for (int i = 0; i < points; ++i) dnu(i) = (gnu(i) / points) / (1.0 + g_mu.norm());
            }
            slope = g_mu.dot(dx);
            if (!reduced) slope += gnu.dot(dnu) / points;
        }

        // Fraction to the boundary, then Armijo backtracking with strict progress.
        double step = 1.0;
        if (dx(0) < 0.0) step = std::min(step, -0.995 * (x(0) - kLambdaFloor) / dx(0));
        if (!reduced) {
            for (int i = 0; i < points; ++i) {
                if (dnu(i) < 0.0) step = std::min(step, -0.995 * nu(i) / dnu(i));
                const double dt = 2.0 * grid.sw(i) * dx(0) - dnu(i);
                const double t = 2.0 * x(0) * grid.sw(i) - nu(i);
                if (dt < 0.0) step = std::min(step, -0.995 * t / dt);
            }
        }
        const double phi0 = barrier_value(x, nu, e.value);
        bool accepted = false;
        int backtracks = 0;
        VectorXd x_trial, nu_trial;
        for (int back = 0; back < 48 && !accepted; ++back, step *= 0.5) {
            backtracks = back;
            x_trial = x + step * dx;
            x_trial(0) = std::max(x_trial(0), kLambdaFloor);
            nu_trial = reduced ? nu : VectorXd(nu + step * dnu);
            const double v = value_at(x_trial, reduced ? nullptr : &nu_trial);
            if (!std::isfinite(v)) continue;
            const double phi = barrier_value(x_trial, nu_trial, v);
            // Armijo with a rounding allowance: the endgame Newton polish improves
            // the gradient while the value change falls below double resolution.
            const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(phi0));
            // The constraint-restoration step may lower the surrogate; accept it once.
            const bool restoration = reduced && pinned_count > 0 && back == 0 &&
                                     (E * x).cwiseAbs().maxCoeff() > 1e-12;
            if (phi >= phi0 + 1e-4 * step * slope - slack || restoration) accepted = true;
        }
        // Creeping along a kink surface shows up as microscopic accepted steps (the
        // curvature there scales like 1/|(c,s)|); treat a run of those as a stall.
        if (accepted && (backtracks >= 25 || step * 2.0 <= 1e-8)) {
            ++creep_streak;
        } else {
            creep_streak = 0;
        }
        if (accepted && creep_streak >= 3 && reduced && pinned_count == 0 && toggle_budget > 0) {
            int activated = 0;
            for (int i = 0; i < points; ++i) {
                if (e.kink_ratio(i) > 0.0 && e.kink_ratio(i) <= kKinkPinRatio) {
                    pinned[static_cast<size_t>(i)] = 1;
                    ++activated;
                }
            }
            if (activated > 0) {
                --toggle_budget;
                pinned_count = activated;
                creep_streak = 0;
                if (trace) std::fprintf(stderr, "  [creep-pin %d points, budget %d]\n", activated, toggle_budget);
                continue;
            }
        }
        if (trace) {
            std::fprintf(stderr,
                         "it=%3d mu=%.1e val=%.14f cert=%.3e pin=%d slope=%.3e step=%.3e acc=%d lam=%.6g\n",
                         iter, mu, e.value, cert, pinned_count, slope, step * 2.0,
                         accepted ? 1 : 0, x(0));
        }
        if (!accepted) {
            if (mu > 0.0) {
                mu = mu <= 1e-16 ? 0.0 : mu * shrink;
                continue;
            }
            // Smooth iteration exhausted at machine precision. Pin any near-kink
            // points and retry with the constrained step; a stalled constrained
            // iteration is released the same way.
            if (reduced && toggle_budget > 0) {
                --toggle_budget;
                if (pinned_count == 0) {
                    int activated = 0;
                    for (int i = 0; i < points; ++i) {
                        if (e.kink_ratio(i) > 0.0 && e.kink_ratio(i) <= kKinkPinRatio) {
                            pinned[static_cast<size_t>(i)] = 1;
                            ++activated;
                        }
                    }
                    if (activated > 0) {
                        pinned_count = activated;
                        if (trace) std::fprintf(stderr, "  [stall-pin %d points, budget %d]\n", activated, toggle_budget);
                        continue;
                    }
                } else {
                    std::fill(pinned.begin(), pinned.end(), 0);
                    pinned_count = 0;
                    if (trace) std::fprintf(stderr, "  [stall-release, budget %d]\n", toggle_budget);
                    continue;
                }
            }
            break;
        }
        x = x_trial;
        if (!reduced) nu = nu_trial;
    }

    // Final verdict on the last iterate before giving up.
    {
        const Eval e = evaluate(grid, basis, x, reduced ? nullptr : &nu, P,
                                Want::kDerivatives, &pinned);
        if (e.ok && reduced && pinned_count == 0) {
            const double cert = projected_sup_norm(e.grad, x(0));
            if (cert <= settings.tol_grad) return assemble(x, nu, e.value, iter, cert);
        }
        if (e.ok && e.value > best_value) {
            best_value = e.value;
            best_x = x;
            best_nu = nu;
        }
    }
    throw SolverError("solve_dual: no convergence within the iteration limit",
                      assemble(best_x, best_nu, best_value, iter, best_cert));
}

}  // namespace fbcap
