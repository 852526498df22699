#pragma once

// Gaussian-mixture baseline: k-means++ seeding, EM with a covariance
// eigenvalue floor, best of several replicates; plus the mixture truncated
// to the AOI bounding box.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"

namespace mzsm {

struct GmmModel {
    std::vector<double> weights;
    std::vector<Point2D> means;
    std::vector<Eigen::Matrix2d> covariances;

    std::size_t k() const { return weights.size(); }

    double component_density(std::size_t j, const Point2D& p) const {
        const Eigen::Matrix2d& c = covariances[j];
        const double det = c.determinant();
        const double dx = p.x - means[j].x;
        const double dy = p.y - means[j].y;
        // Closed-form 2x2 inverse quadratic form.
        const double q = (c(1, 1) * dx * dx - 2.0 * c(0, 1) * dx * dy + c(0, 0) * dy * dy) / det;
        return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
    }

    double density(const Point2D& p) const {
        double f = 0.0;
        for (std::size_t j = 0; j < k(); ++j) f += weights[j] * component_density(j, p);
        return f;
    }
};

struct GmmOptions {
    std::size_t replicates = 5;
    std::size_t max_iterations = 500;
    double relative_tolerance = 1e-7;
    double covariance_floor = 1e-4;  // m^2, minimum eigenvalue
};

struct GmmReplicate {
    bool converged = false;
    bool collapsed = false;
    std::vector<double> log_likelihood_trace;
    double log_likelihood() const {
        return log_likelihood_trace.empty() ? -std::numeric_limits<double>::infinity()
                                            : log_likelihood_trace.back();
    }
};

struct GmmFit {
    GmmModel model;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    std::vector<GmmReplicate> replicates;
};

namespace detail::gmm {

inline Eigen::Matrix2d floor_eigenvalues(const Eigen::Matrix2d& m, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (m + m.transpose()));
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline std::vector<Point2D> kmeans_pp_seeds(const std::vector<Point2D>& x, std::size_t k, std::mt19937_64& rng) {
    std::vector<Point2D> seeds;
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    seeds.push_back(x[pick(rng)]);
    std::vector<double> d2(x.size(), std::numeric_limits<double>::infinity());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (seeds.size() < k) {
        const Point2D& last = seeds.back();
        double total = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dx = x[i].x - last.x, dy = x[i].y - last.y;
            d2[i] = std::min(d2[i], dx * dx + dy * dy);
            total += d2[i];
        }
        if (!(total > 0.0)) {
            seeds.push_back(x[pick(rng)]);
            continue;
        }
        double target = unit(rng) * total;
        std::size_t chosen = x.size() - 1;
        for (std::size_t i = 0; i < x.size(); ++i) {
            target -= d2[i];
            if (target <= 0.0) {
                chosen = i;
                break;
            }
        }
        seeds.push_back(x[chosen]);
    }
    return seeds;
}

// One EM run from a k-means++ start. Initial covariances are the diagonal
// of the data variance, initial weights uniform.
inline std::pair<GmmModel, GmmReplicate> run_em(const std::vector<Point2D>& x, std::size_t k,
                                                const GmmOptions& opt, std::mt19937_64& rng) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (const auto& p : x) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double vx = 0.0, vy = 0.0;
    for (const auto& p : x) {
        vx += (p.x - mx) * (p.x - mx);
        vy += (p.y - my) * (p.y - my);
    }
    vx /= static_cast<double>(n);
    vy /= static_cast<double>(n);

    GmmModel m;
    m.means = kmeans_pp_seeds(x, k, rng);
    m.weights.assign(k, 1.0 / static_cast<double>(k));
    Eigen::Matrix2d init = Eigen::Matrix2d::Zero();
    init(0, 0) = vx;
    init(1, 1) = vy;
    m.covariances.assign(k, floor_eigenvalues(init, opt.covariance_floor));

    GmmReplicate rep;
    std::vector<double> resp(n * k);
    std::vector<double> logp(k);
    for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        // E-step, log domain.
        std::vector<double> log_norm(k), log_w(k);
        std::vector<Eigen::Matrix2d> inv(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double det = m.covariances[j].determinant();
            log_norm[j] = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
            log_w[j] = std::log(m.weights[j]);
            inv[j] = m.covariances[j].inverse();
        }
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double dx = x[i].x - m.means[j].x, dy = x[i].y - m.means[j].y;
                const double q = inv[j](0, 0) * dx * dx + 2.0 * inv[j](0, 1) * dx * dy + inv[j](1, 1) * dy * dy;
                logp[j] = log_w[j] + log_norm[j] - 0.5 * q;
                best = std::max(best, logp[j]);
            }
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += std::exp(logp[j] - best);
            const double lse = best + std::log(s);
            ll += lse;
            for (std::size_t j = 0; j < k; ++j) resp[i * k + j] = std::exp(logp[j] - lse);
        }
        const bool done = !rep.log_likelihood_trace.empty() &&
                          std::abs(ll - rep.log_likelihood_trace.back()) <
                              opt.relative_tolerance * std::abs(ll);
        rep.log_likelihood_trace.push_back(ll);
        if (done) {
            rep.converged = true;
            break;
        }

        // M-step.
        GmmModel next;
        next.weights.resize(k);
        next.means.resize(k);
        next.covariances.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            double nk = 0.0, sx = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * k + j];
                nk += r;
                sx += r * x[i].x;
                sy += r * x[i].y;
            }
            if (nk < 1e-10 * static_cast<double>(n)) {
                rep.collapsed = true;
                return {m, rep};
            }
            const Point2D mu{sx / nk, sy / nk};
            double cxx = 0.0, cxy = 0.0, cyy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * k + j];
                const double dx = x[i].x - mu.x, dy = x[i].y - mu.y;
                cxx += r * dx * dx;
                cxy += r * dx * dy;
                cyy += r * dy * dy;
            }
            Eigen::Matrix2d c;
            c << cxx / nk, cxy / nk, cxy / nk, cyy / nk;
            next.weights[j] = nk / static_cast<double>(n);
            next.means[j] = mu;
            next.covariances[j] = floor_eigenvalues(c, opt.covariance_floor);
        }
        m = std::move(next);
    }
    return {m, rep};
}

}  // namespace detail::gmm

inline GmmFit fit_gmm_detailed(const std::vector<Point2D>& samples, std::size_t k, std::uint64_t seed,
                               const GmmOptions& opt = {}) {
    if (k < 1) throw SingularFit("GMM needs at least one component");
    if (samples.size() < 10 * k) throw SingularFit("GMM fit needs at least 10 samples per component");
    if (opt.replicates < 1) throw SingularFit("GMM fit needs at least one replicate");
    std::mt19937_64 rng(seed);
    GmmFit best;
    for (std::size_t r = 0; r < opt.replicates; ++r) {
        auto [model, rep] = detail::gmm::run_em(samples, k, opt, rng);
        if (!rep.collapsed && rep.log_likelihood() > best.log_likelihood) {
            best.model = model;
            best.log_likelihood = rep.log_likelihood();
        }
        best.replicates.push_back(std::move(rep));
    }
    if (best.model.k() == 0) throw SingularFit("every EM replicate collapsed a component");
    return best;
}

inline GmmModel fit_gmm(const std::vector<Point2D>& samples, std::size_t k, std::size_t replicates,
                        std::uint64_t seed) {
    GmmOptions opt;
    opt.replicates = replicates;
    return fit_gmm_detailed(samples, k, seed, opt).model;
}

// Midpoint quadrature over a box: calls fn(center, cell_area) for each cell.
// Edge cells are clipped to the box.
template <class Fn>
void for_each_quadrature_cell(const Box2D& box, double resolution, Fn&& fn) {
    const auto nx = static_cast<std::size_t>(std::ceil(box.width() / resolution - 1e-9));
    const auto ny = static_cast<std::size_t>(std::ceil(box.height() / resolution - 1e-9));
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y0 = box.min.y + static_cast<double>(iy) * resolution;
        const double y1 = std::min(box.max.y, y0 + resolution);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x0 = box.min.x + static_cast<double>(ix) * resolution;
            const double x1 = std::min(box.max.x, x0 + resolution);
            fn(Point2D{0.5 * (x0 + x1), 0.5 * (y0 + y1)}, (x1 - x0) * (y1 - y0));
        }
    }
}

// Mixture conditioned on a box: zero outside, rescaled by its quadrature
// integral inside.
class TruncatedGmm {
public:
    TruncatedGmm(GmmModel model, const Box2D& box, double resolution = 0.5)
        : model_(std::move(model)), box_(box) {
        if (!(box.area() > 0.0)) throw InvalidGeometry("truncation box must have positive area");
        double mass = 0.0;
        for_each_quadrature_cell(box_, resolution, [&](const Point2D& c, double a) { mass += model_.density(c) * a; });
        if (!(mass > 0.0)) throw SingularFit("mixture has no mass inside the truncation box");
        normalizer_ = 1.0 / mass;
    }

    double operator()(const Point2D& p) const {
        if (!box_.contains(p)) return 0.0;
        return model_.density(p) * normalizer_;
    }

    const GmmModel& model() const { return model_; }
    const Box2D& box() const { return box_; }

private:
    GmmModel model_;
    Box2D box_;
    double normalizer_ = 1.0;
};

inline double truncated_gmm_pdf(const GmmModel& m, const Box2D& box, const Point2D& p, double resolution = 0.5) {
    return TruncatedGmm(m, box, resolution)(p);
}

}  // namespace mzsm
