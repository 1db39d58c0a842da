// observables.hpp: output intensity, light-cone front, g2 normalization and
// the time-series container shared by the engines

#pragma once

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polariton/errors.hpp"

namespace polariton {

// Time grid plus named real-valued columns of equal length. Columns live in a
// deque so references returned by add() stay valid as more are added.
struct ObservableSeries {
    std::string time_name = "t";
    std::vector<double> time;
    std::deque<std::pair<std::string, std::vector<double>>> columns;

    std::vector<double>& add(const std::string& name) {
        for (auto& [n, c] : columns)
            if (n == name) return c;
        columns.emplace_back(name, std::vector<double>(time.size(), 0.0));
        return columns.back().second;
    }
    const std::vector<double>& operator[](const std::string& name) const {
        for (const auto& [n, c] : columns)
            if (n == name) return c;
        throw std::out_of_range("no column '" + name + "'");
    }
    bool has(const std::string& name) const {
        for (const auto& [n, c] : columns)
            if (n == name) return true;
        return false;
    }
};

inline std::vector<double> uniform_grid(double t_final, int samples) {
    std::vector<double> t(samples);
    for (int i = 0; i < samples; ++i) t[i] = t_final * i / (samples - 1);
    return t;
}

inline std::string pop_name(int site) { return "pop_" + std::to_string(site + 1); }

// I_out = |J1| n_N.
inline double output_intensity(double n_last, double j1) {
    if (!(n_last >= 0.0 && n_last <= 1.0)) throw DomainError("output_intensity: population outside [0, 1]");
    return std::abs(j1) * n_last;
}

// Largest site index with population >= threshold * max, or -1.
inline int front_position(const std::vector<double>& pops, double threshold) {
    double peak = 0.0;
    for (double p : pops) peak = std::max(peak, p);
    if (!(peak > 0.0)) return -1;
    for (int i = static_cast<int>(pops.size()) - 1; i >= 0; --i)
        if (pops[i] >= threshold * peak) return i;
    return -1;
}

inline std::vector<double> g2_normalize(const std::vector<double>& raw, double denom) {
    if (!(denom > 0.0)) throw UndefinedCorrelationError("g2 normalization needs a positive steady-state population");
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / (denom * denom);
    return out;
}

// Compensated summation.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

struct LinearFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

// Least-squares line with coefficient of determination.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: need >= 2 matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : (syy == 0.0 ? 1.0 : 0.0);
    return f;
}

} // namespace polariton
