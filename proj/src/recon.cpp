#include "cswm/recon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cswm {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return dot(a, a); }

bool all_finite(const std::vector<double>& a) {
    for (double v : a)
        if (!std::isfinite(v))
            return false;
    return true;
}

} // namespace

double soft_threshold(double value, double threshold) {
    if (value > threshold)
        return value - threshold;
    if (value < -threshold)
        return value + threshold;
    return 0.0;
}

double lipschitz_estimate(const SensingOperator& op, int sweeps) {
    const size_t n = static_cast<size_t>(op.order());
    std::vector<double> v(n);
    SplitMix64 rng{0xC0FFEE0DDBA11ULL ^ (static_cast<uint64_t>(op.order()) << 32) ^
                   static_cast<uint64_t>(op.row_count())};
    for (double& e : v)
        e = static_cast<double>(rng.next() >> 11) * 0x1.0p-53 - 0.5;
    double nv = std::sqrt(norm2(v));
    if (nv == 0.0)
        v[0] = nv = 1.0;
    for (double& e : v)
        e /= nv;

    double eig = 0.0;
    for (int s = 0; s < sweeps; ++s) {
        std::vector<double> w = op.adjoint_real(op.apply_real(v));
        eig = std::sqrt(norm2(w));
        if (eig < 1e-12 || !std::isfinite(eig))
            return 1.0;
        for (size_t i = 0; i < n; ++i)
            v[i] = w[i] / eig;
    }
    return eig * 1.05;
}

double default_lambda(const SensingOperator& op, std::span<const double> measurements) {
    const std::vector<double> bp = op.adjoint_real(measurements);
    double m = 0.0;
    for (double v : bp)
        m = std::max(m, std::fabs(v));
    return 0.01 * m;
}

ReconResult solve(const ReconProblem& p) {
    if (p.op == nullptr)
        throw std::invalid_argument("solve: missing operator");
    if (p.width < 1 || p.height < 1 ||
        static_cast<size_t>(p.width) * p.height != static_cast<size_t>(p.op->order()))
        throw std::invalid_argument("solve: image shape does not match the operator order");
    if (p.measurements.size() != static_cast<size_t>(p.op->row_count()))
        throw std::invalid_argument("solve: measurement count does not match the operator");
    if (p.lambda < 0.0 || p.max_iters < 1)
        throw std::invalid_argument("solve: bad solver parameters");
    if (p.box && p.box->first > p.box->second)
        throw std::invalid_argument("solve: empty box");

    const SparsityTransform psi(p.basis, p.width, p.height);
    const std::vector<double>& y = p.measurements;
    const size_t n = static_cast<size_t>(p.width) * p.height;

    ReconResult res;
    res.lipschitz = lipschitz_estimate(*p.op);
    double step_l = res.lipschitz;

    auto clamp_box = [&](std::vector<double>& v) {
        if (!p.box)
            return;
        for (double& e : v)
            e = std::clamp(e, p.box->first, p.box->second);
    };
    auto penalty = [&](const std::vector<double>& x) {
        if (p.lambda == 0.0)
            return 0.0;
        double s = 0.0;
        for (double c : psi.forward(x))
            s += std::fabs(c);
        return p.lambda * s;
    };
    auto residual_energy = [&](const std::vector<double>& x) {
        std::vector<double> ax = p.op->apply_real(x);
        double s = 0.0;
        for (size_t i = 0; i < ax.size(); ++i) {
            const double r = ax[i] - y[i];
            s += r * r;
        }
        return 0.5 * s;
    };

    std::vector<double> x_prev(n, 0.0);
    clamp_box(x_prev);
    double f_prev = residual_energy(x_prev) + penalty(x_prev);
    if (!std::isfinite(f_prev)) {
        res.image = std::move(x_prev);
        res.diverged = true;
        res.final_objective = f_prev;
        return res;
    }
    if (p.keep_trace)
        res.objective.push_back(f_prev);

    std::vector<double> y_k = x_prev;
    double t_k = 1.0;

    // Accelerated descent stalls in short plateaus while the momentum
    // re-aims, so one small step proves nothing. Convergence is declared
    // only after this many consecutive accepted steps, each changing the
    // objective by less than the tolerance.
    constexpr int kSettleRun = 10;
    int settle_run = 0;

    for (int iter = 1; iter <= p.max_iters; ++iter) {
        std::vector<double> ay = p.op->apply_real(y_k);
        for (size_t i = 0; i < ay.size(); ++i)
            ay[i] -= y[i];
        const double f_smooth_yk = 0.5 * norm2(ay);
        std::vector<double> grad = p.op->adjoint_real(ay);

        std::vector<double> cand;
        double f_smooth_cand = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            cand.assign(n, 0.0);
            for (size_t i = 0; i < n; ++i)
                cand[i] = y_k[i] - grad[i] / step_l;
            if (p.lambda > 0.0) {
                std::vector<double> w = psi.forward(cand);
                const double t = p.lambda / step_l;
                for (double& c : w)
                    c = soft_threshold(c, t);
                cand = psi.inverse(w);
            }
            clamp_box(cand);

            f_smooth_cand = residual_energy(cand);
            double quad = f_smooth_yk;
            double dist = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double d = cand[i] - y_k[i];
                quad += grad[i] * d;
                dist += d * d;
            }
            quad += 0.5 * step_l * dist;
            if (!std::isfinite(f_smooth_cand))
                break;
            if (f_smooth_cand <= quad + 1e-12 * std::max(1.0, std::fabs(quad)))
                break;
            step_l *= 2.0;
        }

        const double f_cand = f_smooth_cand + penalty(cand);
        if (!std::isfinite(f_cand) || !all_finite(cand)) {
            res.diverged = true;
            res.iterations = iter;
            break;
        }

        // Monotone update: fall back to the previous iterate when the
        // momentum step overshoots.
        const bool accepted = f_cand <= f_prev;
        std::vector<double> x_new;
        double f_new;
        if (accepted) {
            x_new = cand;
            f_new = f_cand;
        } else {
            x_new = x_prev;
            f_new = f_prev;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
        std::vector<double> y_next(n);
        for (size_t i = 0; i < n; ++i)
            y_next[i] = x_new[i] + (t_k / t_next) * (cand[i] - x_new[i]) +
                        ((t_k - 1.0) / t_next) * (x_new[i] - x_prev[i]);

        // A rejected candidate keeps the objective flat without being a
        // fixed point, so only accepted steps may extend the settle run.
        if (accepted && std::fabs(f_prev - f_new) <= p.tolerance * std::max(1.0, std::fabs(f_prev)))
            ++settle_run;
        else
            settle_run = 0;
        x_prev = std::move(x_new);
        f_prev = f_new;
        y_k = std::move(y_next);
        t_k = t_next;
        res.iterations = iter;
        if (p.keep_trace)
            res.objective.push_back(f_new);
        if (settle_run >= kSettleRun) {
            res.converged = true;
            break;
        }
    }

    res.image = std::move(x_prev);
    res.final_objective = f_prev;
    return res;
}

} // namespace cswm
