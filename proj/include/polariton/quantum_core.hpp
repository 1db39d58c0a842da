// quantum_core.hpp: many-body operators for the hard-core lattice model
//
// Basis states are occupation bitstrings with site 0 in the least
// significant bit. H = -sum_{i != j} J_ij s+_i s-_j + P (s+_0 + s-_0)
//                    + beta sum_i n_i + sum_{i != j} V_ij n_i n_j.

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "polariton/errors.hpp"
#include "polariton/lattice_model.hpp"

namespace polariton {

using PureState = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;

enum class JumpKind { rydberg_decay, output_left, output_right };

inline const char* to_string(JumpKind k) {
    switch (k) {
        case JumpKind::rydberg_decay: return "rydberg_decay";
        case JumpKind::output_left: return "output_left";
        case JumpKind::output_right: return "output_right";
    }
    return "?";
}

// Jump operator sqrt(rate) s-_site.
struct Jump {
    int site;
    double rate;
    JumpKind kind;
};

using JumpSet = std::vector<Jump>;

// Site decay everywhere; output channels on the first site and, for N > 1,
// the last one.
inline JumpSet make_jumps(const SpinModel& m) {
    JumpSet js;
    for (int i = 0; i < m.n_sites; ++i)
        if (m.gamma_site(i) > 0.0) js.push_back({i, m.gamma_site(i), JumpKind::rydberg_decay});
    if (m.gamma_out > 0.0) {
        js.push_back({0, m.gamma_out, JumpKind::output_left});
        if (m.n_sites > 1) js.push_back({m.n_sites - 1, m.gamma_out, JumpKind::output_right});
    }
    return js;
}

inline std::size_t hilbert_dim(int n_sites) {
    if (n_sites < 1 || n_sites > 24) throw DimensionError("unsupported number of sites for a full many-body basis");
    return std::size_t{1} << n_sites;
}

inline bool occupied(std::uint64_t b, int site) { return (b >> site) & 1u; }

// Diagonal part: beta * n_total + sum_{i != j} V_ij n_i n_j.
inline double diagonal_energy(const SpinModel& m, std::uint64_t b) {
    double e = m.beta * std::popcount(b);
    for (int i = 0; i < m.n_sites; ++i) {
        if (!occupied(b, i)) continue;
        for (int j = i + 1; j < m.n_sites; ++j)
            if (occupied(b, j)) e += 2.0 * m.interaction(i, j);
    }
    return e;
}

inline void check_dim(const SpinModel& m, Eigen::Index n) {
    if (static_cast<std::size_t>(n) != hilbert_dim(m.n_sites))
        throw DimensionError("state dimension does not match 2^n_sites");
}

// H psi, evaluated directly on bitstrings.
inline PureState hamiltonian_apply(const SpinModel& m, const PureState& psi) {
    check_dim(m, psi.size());
    const int N = m.n_sites;
    PureState out = PureState::Zero(psi.size());
    for (Eigen::Index bi = 0; bi < psi.size(); ++bi) {
        const cplx amp = psi(bi);
        if (amp == 0.0) continue;
        const auto b = static_cast<std::uint64_t>(bi);
        out(bi) += diagonal_energy(m, b) * amp;
        for (int j = 0; j < N; ++j) {
            if (!occupied(b, j)) continue;
            for (int i = 0; i < N; ++i) {
                if (i == j || occupied(b, i)) continue;
                const std::uint64_t to = b ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j);
                out(static_cast<Eigen::Index>(to)) -= m.hopping(i, j) * amp;
            }
        }
        if (m.pump != 0.0) out(static_cast<Eigen::Index>(b ^ 1u)) += m.pump * amp;
    }
    return out;
}

// Dense H for small systems (oracles and tests).
inline Eigen::MatrixXcd dense_hamiltonian(const SpinModel& m) {
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(m.n_sites));
    Eigen::MatrixXcd H(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) H.col(c) = hamiltonian_apply(m, PureState::Unit(dim, c));
    return H;
}

// Sparse H_eff = H - (i/2) sum_c rate_c n_{site_c}, assembled from the
// bitstring rules above.
inline Eigen::SparseMatrix<cplx, Eigen::RowMajor> effective_hamiltonian(const SpinModel& m, const JumpSet& jumps) {
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(m.n_sites));
    const int N = m.n_sites;
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index bi = 0; bi < dim; ++bi) {
        const auto b = static_cast<std::uint64_t>(bi);
        double loss = 0.0;
        for (const Jump& j : jumps)
            if (occupied(b, j.site)) loss += j.rate;
        trip.emplace_back(bi, bi, cplx(diagonal_energy(m, b), -0.5 * loss));
        for (int j = 0; j < N; ++j) {
            if (!occupied(b, j)) continue;
            for (int i = 0; i < N; ++i) {
                if (i == j || occupied(b, i)) continue;
                const auto to = static_cast<Eigen::Index>(b ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j));
                trip.emplace_back(to, bi, -m.hopping(i, j));
            }
        }
        if (m.pump != 0.0) trip.emplace_back(static_cast<Eigen::Index>(b ^ 1u), bi, m.pump);
    }
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> H(dim, dim);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

// Reusable Lindblad generator for one (model, jumps) pair.
class Liouvillian {
public:
    Liouvillian(const SpinModel& m, const JumpSet& jumps) : jumps_(jumps), heff_(effective_hamiltonian(m, jumps)) {
        dim_ = heff_.rows();
        for (const Jump& j : jumps_)
            if (j.site < 0 || j.site >= m.n_sites) throw DimensionError("jump site out of range");
    }

    Eigen::Index dim() const { return dim_; }
    const Eigen::SparseMatrix<cplx, Eigen::RowMajor>& heff() const { return heff_; }
    const JumpSet& jumps() const { return jumps_; }

    // -i (H_eff rho - rho H_eff^dag) + sum_c rate_c s-_c rho s+_c for Hermitian rho.
    DensityMatrix apply(const DensityMatrix& rho) const {
        if (rho.rows() != dim_ || rho.cols() != dim_) throw DimensionError("density matrix dimension mismatch");
        const DensityMatrix A = heff_ * rho;
        DensityMatrix out = cplx(0.0, -1.0) * A + cplx(0.0, 1.0) * A.adjoint();
        add_jumps(rho, out);
        return out;
    }

    // Sum of rate_c s-_c rho s+_c, added into `out`.
    void add_jumps(const DensityMatrix& rho, DensityMatrix& out) const {
        for (const Jump& j : jumps_) {
            const Eigen::Index bit = Eigen::Index{1} << j.site;
            for (Eigen::Index c = 0; c < dim_; ++c) {
                if (c & bit) continue;
                for (Eigen::Index r = 0; r < dim_; ++r) {
                    if (r & bit) continue;
                    out(r, c) += j.rate * rho(r | bit, c | bit);
                }
            }
        }
    }

private:
    JumpSet jumps_;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> heff_;
    Eigen::Index dim_ = 0;
};

inline DensityMatrix liouvillian_apply(const SpinModel& m, const JumpSet& jumps, const DensityMatrix& rho) {
    check_dim(m, rho.rows());
    return Liouvillian(m, jumps).apply(rho);
}

inline double trace_norm(const Eigen::MatrixXcd& A) {
    const Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

// s-_site rho s+_site, unnormalized.
inline DensityMatrix lower_both_sides(const DensityMatrix& rho, int site) {
    const Eigen::Index dim = rho.rows();
    const Eigen::Index bit = Eigen::Index{1} << site;
    DensityMatrix out = DensityMatrix::Zero(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        if (c & bit) continue;
        for (Eigen::Index r = 0; r < dim; ++r)
            if (!(r & bit)) out(r, c) = rho(r | bit, c | bit);
    }
    return out;
}

inline PureState vacuum_state(int n_sites) {
    return PureState::Unit(static_cast<Eigen::Index>(hilbert_dim(n_sites)), 0);
}

inline DensityMatrix vacuum_density(int n_sites) {
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(0, 0) = 1.0;
    return rho;
}

struct Observable {
    enum class Kind { population, output_intensity, blockade_window_sum } kind;
    int site = 0;
};

// Parses "population(i)", "output_intensity" or "blockade_window_sum(i)".
inline Observable parse_observable(const std::string& name) {
    static const std::regex indexed(R"((population|blockade_window_sum)\((\d+)\))");
    std::smatch mt;
    if (name == "output_intensity") return {Observable::Kind::output_intensity, 0};
    if (std::regex_match(name, mt, indexed)) {
        const int site = std::stoi(mt[2]);
        return {mt[1] == "population" ? Observable::Kind::population : Observable::Kind::blockade_window_sum, site};
    }
    throw std::invalid_argument("unknown observable '" + name + "'");
}

// Occupation probabilities per basis state, normalized.
inline Eigen::VectorXd basis_weights(const PureState& psi) {
    Eigen::VectorXd w = psi.cwiseAbs2();
    return w / w.sum();
}

inline Eigen::VectorXd basis_weights(const DensityMatrix& rho) {
    Eigen::VectorXd w = rho.diagonal().real();
    return w / w.sum();
}

inline Eigen::VectorXd populations_from_weights(const Eigen::VectorXd& w, int n_sites) {
    Eigen::VectorXd pop = Eigen::VectorXd::Zero(n_sites);
    for (Eigen::Index b = 0; b < w.size(); ++b) {
        if (w(b) == 0.0) continue;
        for (int i = 0; i < n_sites; ++i)
            if (occupied(static_cast<std::uint64_t>(b), i)) pop(i) += w(b);
    }
    return pop;
}

template <class State>
Eigen::VectorXd populations(const State& s, int n_sites) {
    return populations_from_weights(basis_weights(s), n_sites);
}

template <class State>
double expectation(const SpinModel& m, const State& s, const Observable& obs) {
    check_dim(m, s.rows());
    const Eigen::VectorXd pop = populations(s, m.n_sites);
    auto site_ok = [&](int i) {
        if (i < 0 || i >= m.n_sites) throw std::invalid_argument("observable site out of range");
    };
    switch (obs.kind) {
        case Observable::Kind::population:
            site_ok(obs.site);
            return pop(obs.site);
        case Observable::Kind::output_intensity:
            return m.j1 * pop(m.n_sites - 1);
        case Observable::Kind::blockade_window_sum: {
            site_ok(obs.site);
            double s = 0.0;
            for (int j = 0; j < m.n_sites; ++j)
                if (std::abs(j - obs.site) < m.blockade_sites) s += pop(j);
            return s;
        }
    }
    throw std::invalid_argument("unknown observable");
}

template <class State>
double expectation(const SpinModel& m, const State& s, const std::string& name) {
    return expectation(m, s, parse_observable(name));
}

} // namespace polariton
