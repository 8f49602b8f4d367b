#include "cswm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "cswm/keystream.hpp"

namespace cswm {

namespace {

constexpr double kPsnrCap = 120.0;

std::vector<double> to_double(std::span<const int32_t> v) {
    return std::vector<double>(v.begin(), v.end());
}

std::vector<double> tie_ranks(std::span<const double> v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]])
            ++j;
        const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k)
            ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw std::invalid_argument("correlation of a constant sequence is undefined");
    return sab / std::sqrt(saa * sbb);
}

} // namespace

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("psnr: size mismatch");
    if (peak <= 0.0)
        throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0)
        return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double median(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 3)
        throw std::invalid_argument("spearman_rho: need at least 3 paired samples");
    return pearson(tie_ranks(a), tie_ranks(b));
}

double spearman_pvalue_leq(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 3 || a.size() > 9)
        throw std::invalid_argument("spearman_pvalue_leq: sample size must be in [3, 9]");
    const std::vector<double> ra = tie_ranks(a);
    std::vector<double> rb = tie_ranks(b);
    const double observed = pearson(ra, rb);

    std::sort(rb.begin(), rb.end());
    size_t total = 0, at_most = 0;
    do {
        ++total;
        if (pearson(ra, rb) <= observed + 1e-12)
            ++at_most;
    } while (std::next_permutation(rb.begin(), rb.end()));
    return static_cast<double>(at_most) / static_cast<double>(total);
}

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn) {
    const size_t workers = std::min<size_t>(std::max(jobs, 1), count);
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (size_t i = w; i < count; i += workers)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::vector<int32_t> eca_attack(std::span<const int32_t> marked, int n) {
    if (n < 0 || n > 16)
        throw std::invalid_argument("eca_attack: n out of range");
    std::vector<int32_t> out(marked.begin(), marked.end());
    if (n == 0)
        return out;
    for (int32_t& v : out)
        v >>= n;
    return out;
}

std::vector<std::vector<double>> synthetic_sparse_patches(int count, int side, uint64_t seed) {
    if (count < 1)
        throw std::invalid_argument("synthetic_sparse_patches: count must be positive");
    if (side < 8 || (side & (side - 1)) != 0)
        throw std::invalid_argument("synthetic_sparse_patches: side must be a power of two, at least 8");

    const SparsityTransform psi(SparsityBasis::Db4Wavelet, side, side);
    const int coarse = side >> psi.levels();
    const size_t total = static_cast<size_t>(side) * side;

    std::vector<std::vector<double>> out;
    out.reserve(static_cast<size_t>(count));
    for (int p = 0; p < count; ++p) {
        SplitMix64 rng{seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(p + 1)};
        auto uniform = [&] { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; };

        std::vector<double> coeffs(total, 0.0);
        // A constant mid-gray scene has approximation coefficients equal to
        // 0.5 * 2^levels; perturbing around that keeps the patches
        // low-contrast, so the acquisition rounding and any embedding noise
        // stay visible against the informative part of each measurement.
        const double ll_base = 0.5 * static_cast<double>(1 << psi.levels());
        for (int r = 0; r < coarse; ++r)
            for (int c = 0; c < coarse; ++c)
                coeffs[static_cast<size_t>(r) * side + c] = ll_base + (uniform() - 0.5) * 0.6;
        const int details = std::max(4, side * side / 64);
        for (int k = 0; k < details; ++k) {
            const int r = static_cast<int>(rng.next() % static_cast<uint64_t>(side));
            const int c = static_cast<int>(rng.next() % static_cast<uint64_t>(side));
            if (r < coarse && c < coarse)
                continue;
            coeffs[static_cast<size_t>(r) * side + c] = (uniform() - 0.5) * 0.24;
        }

        std::vector<double> img = psi.inverse(coeffs);
        for (double& v : img) {
            v = std::clamp(v, 0.02, 0.98);
            v = std::round(v * 255.0) / 255.0;
        }
        out.push_back(std::move(img));
    }
    return out;
}

int default_rows(double sampling_rate, int order) {
    const long rows = std::lround(sampling_rate * order);
    return static_cast<int>(std::clamp<long>(rows, 1, order - 1));
}

std::vector<double> box_solve(const SensingOperator& op, std::vector<double> measurements,
                              double scale, double lambda, int width, int height,
                              const EvalConfig& cfg) {
    ReconProblem p;
    p.op = &op;
    p.measurements = std::move(measurements);
    p.width = width;
    p.height = height;
    p.basis = cfg.basis;
    p.lambda = lambda;
    p.max_iters = cfg.max_iters;
    p.tolerance = cfg.tolerance;
    p.box = {0.0, scale};
    ReconResult r = solve(p);
    for (double& v : r.image)
        v = std::clamp(v / scale, 0.0, 1.0);
    return std::move(r.image);
}

PatchEvaluator::PatchEvaluator(const std::vector<double>& patch, int width, int height,
                               uint64_t op_seed, const EvalConfig& cfg)
    : cfg_(cfg), width_(width), height_(height),
      op_(SensingOperator::build(cfg.kind, width * height,
                                 default_rows(cfg.sampling_rate, width * height), op_seed)),
      y_(op_.project(SceneImage::from_values(width, height, patch))) {
    lambda_ref_ = cfg_.lambda_scale * default_lambda(op_, to_double(y_.values));
    reference_ = box_solve(op_, to_double(y_.values), 1.0, lambda_ref_, width_, height_, cfg_);
}

VariantPsnrs PatchEvaluator::evaluate(int n, const VariantMask& mask) const {
    VariantPsnrs out;
    if (n == 0) {
        if (mask.truncated_clean)
            out.truncated_clean = kPsnrCap;
        if (mask.marked_full)
            out.marked_full = kPsnrCap;
        if (mask.marked_truncated)
            out.marked_truncated = kPsnrCap;
        if (mask.post_eca)
            out.post_eca = kPsnrCap;
        return out;
    }

    const int order = op_.order();
    EmbedParams params;
    params.n = n;
    params.threshold = cfg_.threshold < 0 ? order / 2 : cfg_.threshold;
    ChaChaKeyStream key(cfg_.key);
    const MarkedStream marked = embed_stream(y_.values, params, key);

    std::vector<uint32_t> remaining;
    remaining.reserve(marked.values.size());
    size_t next_consumed = 0;
    for (uint32_t i = 0; i < static_cast<uint32_t>(y_.values.size()); ++i) {
        if (next_consumed < marked.location_map.size() && marked.location_map[next_consumed] == i)
            ++next_consumed;
        else
            remaining.push_back(i);
    }
    const SensingOperator reduced = op_.reduced(marked.location_map);
    const double scale = static_cast<double>(int64_t{1} << n);

    auto score = [&](const std::vector<double>& img) { return psnr(img, reference_); };
    // Every variant is solved with the stock decoder: default weight derived
    // from whatever stream it is fed, box matching that stream's value range.
    auto run = [&](const SensingOperator& op, std::vector<double> vals, double box_scale) {
        const double lambda = cfg_.lambda_scale * default_lambda(op, vals);
        return box_solve(op, std::move(vals), box_scale, lambda, width_, height_, cfg_);
    };

    if (mask.truncated_clean) {
        std::vector<double> vals(remaining.size());
        for (size_t i = 0; i < remaining.size(); ++i)
            vals[i] = static_cast<double>(y_.values[remaining[i]]);
        out.truncated_clean = score(run(reduced, std::move(vals), 1.0));
    }
    if (mask.marked_truncated) {
        out.marked_truncated = score(run(reduced, to_double(marked.values), scale));
    }
    if (mask.post_eca) {
        const std::vector<int32_t> attacked = eca_attack(marked.values, n);
        out.post_eca = score(run(reduced, to_double(attacked), 1.0));
    }
    if (mask.marked_full) {
        // Every position gets a value at the inflated scale: kept positions
        // use their real marked values, consumed positions stand in for
        // themselves by carrying the leading bits of their own protected
        // encoding. This isolates value distortion from stream truncation.
        ChaChaKeyStream standin_key(cfg_.key);
        std::vector<double> full(y_.values.size());
        size_t vi = 0;
        next_consumed = 0;
        for (size_t i = 0; i < y_.values.size(); ++i) {
            if (next_consumed < marked.location_map.size() &&
                marked.location_map[next_consumed] == static_cast<uint32_t>(i)) {
                const Bits enc = encode_payload(y_.values[i], standin_key);
                uint32_t bn = 0;
                for (int k = 0; k < n && k < 16; ++k)
                    bn = (bn << 1) | enc[static_cast<size_t>(k)];
                full[i] = static_cast<double>(int64_t{y_.values[i]} * (int64_t{1} << n) + bn);
                ++next_consumed;
            } else {
                full[i] = static_cast<double>(marked.values[vi++]);
            }
        }
        out.marked_full = score(run(op_, std::move(full), scale));
    }
    return out;
}

namespace {

// Per-patch evaluations for each requested n, parallelized across patches.
std::vector<std::vector<VariantPsnrs>> sweep_patches(const std::vector<std::vector<double>>& patches,
                                                     int width, int height, std::span<const int> ns,
                                                     const EvalConfig& cfg, const VariantMask& mask,
                                                     std::vector<double>* eligibility_out) {
    if (patches.empty() || ns.empty())
        throw std::invalid_argument("sweep: needs at least one patch and one n");
    std::vector<std::vector<VariantPsnrs>> rows(patches.size());
    std::vector<double> elig(patches.size(), 1.0);
    parallel_for(patches.size(), cfg.jobs, [&](size_t p) {
        const PatchEvaluator ev(patches[p], width, height, cfg.seed + p, cfg);
        if (cfg.threshold >= 0) {
            const double sigma = stream_sigma(ev.measurements().values);
            elig[p] = eligibility_probability(cfg.threshold, sigma);
        }
        rows[p].reserve(ns.size());
        for (int n : ns)
            rows[p].push_back(ev.evaluate(n, mask));
    });
    if (eligibility_out)
        *eligibility_out = std::move(elig);
    return rows;
}

double column_median(const std::vector<std::vector<VariantPsnrs>>& rows, size_t col,
                     double VariantPsnrs::* field) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows)
        v.push_back(r[col].*field);
    return median(std::move(v));
}

} // namespace

std::vector<BreakdownRow> distortion_breakdown_sweep(const std::vector<std::vector<double>>& patches,
                                                     int width, int height, std::span<const int> ns,
                                                     const EvalConfig& cfg) {
    VariantMask mask;
    mask.truncated_clean = mask.marked_full = mask.marked_truncated = true;
    const auto rows = sweep_patches(patches, width, height, ns, cfg, mask, nullptr);
    std::vector<BreakdownRow> out;
    out.reserve(ns.size());
    for (size_t c = 0; c < ns.size(); ++c)
        out.push_back({ns[c], column_median(rows, c, &VariantPsnrs::truncated_clean),
                       column_median(rows, c, &VariantPsnrs::marked_full),
                       column_median(rows, c, &VariantPsnrs::marked_truncated)});
    return out;
}

std::vector<RateDistortionRow> rate_distortion_sweep(const std::vector<std::vector<double>>& patches,
                                                     int width, int height, std::span<const int> ns,
                                                     const EvalConfig& cfg) {
    VariantMask mask;
    mask.marked_truncated = true;
    std::vector<double> elig;
    const auto rows = sweep_patches(patches, width, height, ns, cfg, mask, &elig);
    double p_mean = 0.0;
    for (double e : elig)
        p_mean += e;
    p_mean /= static_cast<double>(elig.size());

    std::vector<RateDistortionRow> out;
    out.reserve(ns.size());
    for (size_t c = 0; c < ns.size(); ++c)
        out.push_back({ns[c], relative_capacity(p_mean, ns[c]), compression_rate(ns[c], p_mean),
                       column_median(rows, c, &VariantPsnrs::marked_truncated)});
    return out;
}

std::vector<EcaRow> eca_sweep(const std::vector<std::vector<double>>& patches, int width,
                              int height, std::span<const int> ns, const EvalConfig& cfg) {
    VariantMask mask;
    mask.marked_truncated = mask.post_eca = true;
    const auto rows = sweep_patches(patches, width, height, ns, cfg, mask, nullptr);
    std::vector<EcaRow> out;
    out.reserve(ns.size());
    for (size_t c = 0; c < ns.size(); ++c)
        out.push_back({ns[c], column_median(rows, c, &VariantPsnrs::marked_truncated),
                       column_median(rows, c, &VariantPsnrs::post_eca)});
    return out;
}

} // namespace cswm
