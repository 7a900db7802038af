#ifndef LORLAB_COMPARE_HPP
#define LORLAB_COMPARE_HPP

#include <random>
#include <vector>

#include "lorlab/curvature.hpp"
#include "lorlab/errors.hpp"
#include "lorlab/metric.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

// Coordinate box; all sampled experiments draw points from here.
struct Region {
    std::vector<std::pair<double, double>> box;

    int dim() const { return (int)box.size(); }
    bool empty() const {
        if (box.empty()) return true;
        for (auto& [a, b] : box)
            if (b < a) return true;
        return false;
    }
};

namespace detail {

inline Vec sample_point(const Region& r, std::mt19937_64& rng) {
    Vec x(r.dim());
    for (int i = 0; i < r.dim(); ++i) {
        std::uniform_real_distribution<double> u(r.box[i].first, r.box[i].second);
        x[i] = u(rng);
    }
    return x;
}

inline Vec random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vec v(n);
    do {
        for (int i = 0; i < n; ++i) v[i] = nd(rng);
    } while (v.norm() < 1e-8);
    return v / v.norm();
}

} // namespace detail

// Sampled approximation of sup_{p, |X|_h=|Y|_h=1} |g1(X,Y) - g2(X,Y)| with h
// the Euclidean chart metric. Deterministic for a fixed seed.
inline double dh_distance(const MetricField& g1, const MetricField& g2,
                          const Region& region, int n_samples = 200,
                          unsigned long seed = 12345) {
    if (region.empty() || n_samples <= 0) throw EmptyRegion("dh_distance");
    std::mt19937_64 rng(seed);
    double sup = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        Vec x = detail::sample_point(region, rng);
        Mat diff = g1.at(x) - g2.at(x);
        for (int k = 0; k < 8; ++k) {
            Vec X = detail::random_unit(region.dim(), rng);
            Vec Y = detail::random_unit(region.dim(), rng);
            sup = std::max(sup, std::abs(X.dot(diff * Y)));
        }
        // The sampled sup is sharpened with the exact pointwise maximiser.
        sup = std::max(sup, Eigen::JacobiSVD<Mat>(diff).singularValues()(0));
    }
    return sup;
}

// True iff every sampled g1-causal vector is g2-timelike (g1 has strictly
// narrower cones on the sampled set). The fan includes exact g1-null vectors.
inline bool cone_compare(const MetricField& g1, const MetricField& g2,
                         const Region& region, int n_samples = 100,
                         unsigned long seed = 12345) {
    if (region.empty() || n_samples <= 0) throw EmptyRegion("cone_compare");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> su(0.0, 1.0);
    for (int s = 0; s < n_samples; ++s) {
        Vec x = detail::sample_point(region, rng);
        std::vector<Vec> frame = orthonormal_frame_at(g1, x);
        int n = g1.dim;
        for (int k = 0; k < 12; ++k) {
            Vec dir = Vec::Zero(n);
            if (n == 2) {
                dir = (k % 2 == 0) ? frame[1] : Vec(-frame[1]);
            } else {
                Vec w = detail::random_unit(n - 1, rng);
                for (int i = 1; i < n; ++i) dir += w[i - 1] * frame[i];
            }
            // k even: exact g1-null; k odd: strictly g1-timelike.
            double fac = (k % 2 == 0) ? 1.0 : su(rng);
            Vec v = frame[0] + fac * dir;
            double q2 = v.dot(g2.at(x) * v);
            if (!(q2 < -1e-14 * v.squaredNorm())) return false;
        }
    }
    return true;
}

} // namespace lorlab

#endif
