#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cswm/rdh.hpp"
#include "cswm/sensing.hpp"

namespace cswm {

// Closed-form embedding capacity model for zero-mean Gaussian measurement
// streams. P is the probability that a measurement is eligible, x the
// expected carrier count out of L measurements, C_r the capacity per
// measurement, R_p the expected transmitted stream length and r the byte
// volume ratio of marked (32-bit) versus original (16-bit) streams.

// P = erf(T / (sigma * sqrt(2))); sigma must be positive.
double eligibility_probability(int64_t threshold, double sigma);

// Expected carriers: x = P*L / (1 + P^2 * n/16). The P^2 factor approximates
// the chance that a measurement is both eligible and reached while payload
// bits are buffered; it is considered accurate for n in [8,16].
double carrier_count(double length, double p_eligible, int n);
bool carrier_model_valid(int n);

// Capacity per measurement: C_r = P*n / (1 + P^2 * n/16).
double relative_capacity(double p_eligible, int n);

// Largest threshold for which every marked value stays on 16 bits:
// floor((2^15 - 1) / (2^n - 1)) - 1, clamped to zero when nothing is safe.
int64_t t_max(int n);

// Measurements left after payload consumption: R_p = L * (1 - C_r/16).
double remaining_measurements(double length, double relative_capacity_bits);

// r = 2P / (1 + P^2 * n/16); loose thresholds give P = 1.
double compression_rate(int n, double p_eligible = 1.0);

// Unbiased sample estimate of the stream deviation.
double stream_sigma(std::span<const int32_t> values);

struct MonteCarloStats {
    int trials = 0;
    double carriers_mean = 0, carriers_stderr = 0;       // empirical x
    double capacity_mean = 0, capacity_stderr = 0;       // empirical C_r
    double remaining_mean = 0, remaining_stderr = 0;     // empirical R_p
    double rate_mean = 0, rate_stderr = 0;               // empirical r
    double sigma_mean = 0;                               // stream deviation estimate
};

// Empirical validation of the model: acquires the image through `trials`
// operators (seed, seed+1, ...), embeds with `params`, and counts carrier,
// payload and shifted measurements.
MonteCarloStats monte_carlo_capacity(MatrixKind kind, uint32_t order, uint32_t row_count,
                                     uint64_t seed, const SceneImage& image,
                                     const EmbedParams& params,
                                     const std::vector<uint8_t>& key_material, int trials);

} // namespace cswm
