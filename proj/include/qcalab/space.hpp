#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qcalab/scalar.hpp"

namespace qcalab {

// A finite metric space: sites 0..n-1 with a validated rational distance
// table. The structural tag records how it was built; interval and circle
// carry the linear order the one-dimensional index theory needs.
class MetricSpace {
public:
    enum class Kind { Interval, Circle, Grid, Product, Explicit };

    static std::shared_ptr<const MetricSpace> interval(int n) {
        check_size(n);
        MetricSpace s(n, Kind::Interval);
        s.params_ = {n};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s.set(i, j, Rational(std::abs(i - j)));
        s.validate();
        return finish(std::move(s));
    }

    // Graph (arc) distance on the n-cycle.
    static std::shared_ptr<const MetricSpace> circle(int n) {
        check_size(n);
        MetricSpace s(n, Kind::Circle);
        s.params_ = {n};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                int d = std::abs(i - j);
                s.set(i, j, Rational(std::min(d, n - d)));
            }
        s.validate();
        return finish(std::move(s));
    }

    // L-infinity metric on a box of the given dimensions; sites are
    // enumerated row-major, last coordinate fastest.
    static std::shared_ptr<const MetricSpace> grid(const std::vector<int>& dims) {
        if (dims.empty()) throw std::invalid_argument("grid needs at least one dimension");
        long long n = 1;
        for (int d : dims) {
            if (d < 1) throw std::invalid_argument("grid dimensions must be positive");
            n *= d;
        }
        check_size(static_cast<int>(n));
        MetricSpace s(static_cast<int>(n), Kind::Grid);
        s.params_ = dims;
        auto coords = [&](int id) {
            std::vector<int> c(dims.size());
            for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
                c[k] = id % dims[k];
                id /= dims[k];
            }
            return c;
        };
        for (int i = 0; i < s.size(); ++i) {
            auto ci = coords(i);
            for (int j = 0; j < s.size(); ++j) {
                auto cj = coords(j);
                int d = 0;
                for (std::size_t k = 0; k < dims.size(); ++k)
                    d = std::max(d, std::abs(ci[k] - cj[k]));
                s.set(i, j, Rational(d));
            }
        }
        s.validate();
        return finish(std::move(s));
    }

    // Coordinatewise max metric; site (i, j) of the product gets id
    // i * b.size() + j.
    static std::shared_ptr<const MetricSpace> product(
        const std::shared_ptr<const MetricSpace>& a,
        const std::shared_ptr<const MetricSpace>& b) {
        MetricSpace s(a->size() * b->size(), Kind::Product);
        for (int i1 = 0; i1 < a->size(); ++i1)
            for (int j1 = 0; j1 < b->size(); ++j1)
                for (int i2 = 0; i2 < a->size(); ++i2)
                    for (int j2 = 0; j2 < b->size(); ++j2) {
                        Rational d = std::max(a->dist(i1, i2), b->dist(j1, j2));
                        s.set(i1 * b->size() + j1, i2 * b->size() + j2, d);
                    }
        s.validate();
        return finish(std::move(s));
    }

    // Explicit tables may be empty; the coarse chain complex of the empty
    // space is legitimate input.
    static std::shared_ptr<const MetricSpace> explicit_table(
        const std::vector<std::vector<Rational>>& dist) {
        const int n = static_cast<int>(dist.size());
        MetricSpace s(n, Kind::Explicit);
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(dist[i].size()) != n)
                throw std::invalid_argument("distance table is not square");
            for (int j = 0; j < n; ++j) s.set(i, j, dist[i][j]);
        }
        s.validate();
        return finish(std::move(s));
    }

    int size() const { return n_; }
    Kind kind() const { return kind_; }
    const std::vector<int>& params() const { return params_; }

    const Rational& dist(int i, int j) const {
        return d_[static_cast<std::size_t>(i) * n_ + j];
    }

    bool is_linear() const { return kind_ == Kind::Interval || kind_ == Kind::Circle; }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::Interval: return "interval";
            case Kind::Circle: return "circle";
            case Kind::Grid: return "grid";
            case Kind::Product: return "product";
            case Kind::Explicit: return "explicit";
        }
        return "?";
    }

private:
    MetricSpace(int n, Kind kind)
        : n_(n), kind_(kind), d_(static_cast<std::size_t>(n) * n, Rational(0)) {}

    static void check_size(int n) {
        if (n < 1) throw std::invalid_argument("space needs at least one site");
    }
    static std::shared_ptr<const MetricSpace> finish(MetricSpace s) {
        return std::shared_ptr<const MetricSpace>(new MetricSpace(std::move(s)));
    }

    void set(int i, int j, Rational v) { d_[static_cast<std::size_t>(i) * n_ + j] = std::move(v); }

    void validate() const {
        for (int i = 0; i < n_; ++i) {
            if (dist(i, i) != 0) throw std::invalid_argument("metric: d(x,x) must be 0");
            for (int j = 0; j < n_; ++j) {
                if (dist(i, j) < 0) throw std::invalid_argument("metric: negative distance");
                if (dist(i, j) != dist(j, i)) throw std::invalid_argument("metric: not symmetric");
                if (i != j && dist(i, j) == 0)
                    throw std::invalid_argument("metric: distinct sites at distance 0");
            }
        }
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    if (dist(i, k) > dist(i, j) + dist(j, k))
                        throw std::invalid_argument("metric: triangle inequality violated");
    }

    int n_;
    Kind kind_;
    std::vector<int> params_;
    std::vector<Rational> d_;
};

using SpacePtr = std::shared_ptr<const MetricSpace>;

}  // namespace qcalab
