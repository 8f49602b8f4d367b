#include "cswm/capacity.hpp"

#include <cmath>
#include <stdexcept>

namespace cswm {

double eligibility_probability(int64_t threshold, double sigma) {
    if (threshold < 0)
        throw std::invalid_argument("eligibility_probability: negative threshold");
    if (!(sigma > 0.0))
        throw std::invalid_argument("eligibility_probability: sigma must be positive");
    return std::erf(static_cast<double>(threshold) / (sigma * std::sqrt(2.0)));
}

double carrier_count(double length, double p_eligible, int n) {
    if (n < 1 || n > 16)
        throw std::invalid_argument("carrier_count: levels out of range");
    if (p_eligible < 0.0 || p_eligible > 1.0)
        throw std::invalid_argument("carrier_count: probability out of range");
    return p_eligible * length / (1.0 + p_eligible * p_eligible * n / 16.0);
}

bool carrier_model_valid(int n) { return n >= 8 && n <= 16; }

double relative_capacity(double p_eligible, int n) {
    return carrier_count(static_cast<double>(n), p_eligible, n);
}

int64_t t_max(int n) {
    if (n < 1 || n > 16)
        throw std::invalid_argument("t_max: levels out of range");
    const int64_t safe = ((int64_t{1} << 15) - 1) / chunk_max(n) - 1;
    return safe > 0 ? safe : 0;
}

double remaining_measurements(double length, double relative_capacity_bits) {
    if (relative_capacity_bits < 0.0 || relative_capacity_bits > 16.0)
        throw std::invalid_argument("remaining_measurements: capacity out of range");
    return length * (1.0 - relative_capacity_bits / 16.0);
}

double compression_rate(int n, double p_eligible) {
    return 2.0 * carrier_count(1.0, p_eligible, n);
}

double stream_sigma(std::span<const int32_t> values) {
    if (values.size() < 2)
        throw std::invalid_argument("stream_sigma: need at least two values");
    double mean = 0.0;
    for (int32_t v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (int32_t v : values)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

MonteCarloStats monte_carlo_capacity(MatrixKind kind, uint32_t order, uint32_t row_count,
                                     uint64_t seed, const SceneImage& image,
                                     const EmbedParams& params,
                                     const std::vector<uint8_t>& key_material, int trials) {
    if (trials < 1)
        throw std::invalid_argument("monte_carlo_capacity: need at least one trial");

    std::vector<double> xs, crs, rps, rs;
    double sigma_acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto op = SensingOperator::build(kind, order, row_count, seed + static_cast<uint64_t>(t));
        const auto stream = op.project(image);
        ChaChaKeyStream key(key_material);
        const auto marked = embed_stream(stream.values, params, key);

        size_t expanded = 0;
        for (int32_t v : marked.values)
            if (classify_marked_value(static_cast<int64_t>(v) - params.predictor_offset, params.n,
                                      params.threshold) == MarkClass::Expanded)
                ++expanded;
        const double L = static_cast<double>(stream.values.size());
        const double kept = L - static_cast<double>(marked.location_map.size());
        xs.push_back(static_cast<double>(expanded));
        crs.push_back(static_cast<double>(expanded) * params.n / L);
        rps.push_back(kept);
        rs.push_back(2.0 * kept / L);
        sigma_acc += stream_sigma(stream.values);
    }

    auto mean_stderr = [](const std::vector<double>& v, double& mean, double& se) {
        mean = 0.0;
        for (double x : v)
            mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) {
            se = 0.0;
            return;
        }
        double ss = 0.0;
        for (double x : v)
            ss += (x - mean) * (x - mean);
        se = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
    };

    MonteCarloStats st;
    st.trials = trials;
    mean_stderr(xs, st.carriers_mean, st.carriers_stderr);
    mean_stderr(crs, st.capacity_mean, st.capacity_stderr);
    mean_stderr(rps, st.remaining_mean, st.remaining_stderr);
    mean_stderr(rs, st.rate_mean, st.rate_stderr);
    st.sigma_mean = sigma_acc / trials;
    return st;
}

} // namespace cswm
