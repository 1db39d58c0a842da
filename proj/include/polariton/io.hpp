// io.hpp: CSV and JSON artifacts: band tables, hoppings, series, model and
// run manifest

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polariton/band_solver.hpp"
#include "polariton/config.hpp"
#include "polariton/errors.hpp"
#include "polariton/lattice_model.hpp"
#include "polariton/observables.hpp"

namespace polariton {

using json = nlohmann::json;

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string series_csv(const ObservableSeries& s) {
    std::ostringstream o;
    o << s.time_name;
    for (const auto& [name, col] : s.columns) o << ',' << name;
    o << '\n';
    for (std::size_t r = 0; r < s.time.size(); ++r) {
        o << format_double(s.time[r]);
        for (const auto& [name, col] : s.columns) o << ',' << format_double(col[r]);
        o << '\n';
    }
    return o.str();
}

inline ObservableSeries parse_series_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ObservableSeries s;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    if (header.empty()) throw std::runtime_error("CSV without header");
    s.time_name = header[0];
    for (std::size_t c = 1; c < header.size(); ++c) s.columns.emplace_back(header[c], std::vector<double>{});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c >= header.size()) throw std::runtime_error("ragged CSV row");
            const double v = std::stod(cell);
            if (c == 0) s.time.push_back(v);
            else s.columns.at(c - 1).second.push_back(v);
            ++c;
        }
        if (c != header.size()) throw std::runtime_error("ragged CSV row");
    }
    return s;
}

// k, band_index, label, re_energy, im_energy, e_weight.
inline std::string bands_csv(const BandStructure& bs) {
    std::ostringstream o;
    o << "k,band_index,label,re_energy,im_energy,e_weight\n";
    for (int ik = 0; ik < bs.n_k(); ++ik)
        for (int b = 0; b < bs.n_bands(); ++b)
            o << format_double(bs.k_grid[ik]) << ',' << b << ',' << to_string(bs.labels[b]) << ','
              << format_double(bs.energy(ik, b).real()) << ',' << format_double(bs.energy(ik, b).imag()) << ','
              << format_double(bs.e_weight(ik, b)) << '\n';
    return o.str();
}

// m, re_J, im_J for m = 1..m_max.
inline std::string wannier_csv(const WannierBand& wb, int m_max) {
    std::ostringstream o;
    o << "m,re_J,im_J\n";
    for (int m = 1; m <= m_max; ++m)
        o << m << ',' << format_double(wb.J(m).real()) << ',' << format_double(wb.J(m).imag()) << '\n';
    return o.str();
}

inline json spin_model_to_json(const SpinModel& m) {
    json j;
    j["n_sites"] = m.n_sites;
    json hop = json::array();
    json inter = json::array();
    for (int r = 0; r < m.n_sites; ++r) {
        json hrow = json::array();
        json vrow = json::array();
        for (int c = 0; c < m.n_sites; ++c) {
            hrow.push_back({m.hopping(r, c).real(), m.hopping(r, c).imag()});
            vrow.push_back(m.interaction(r, c));
        }
        hop.push_back(hrow);
        inter.push_back(vrow);
    }
    j["hopping"] = hop;
    j["interaction"] = inter;
    j["beta"] = m.beta;
    j["pump"] = m.pump;
    j["gamma_site"] = std::vector<double>(m.gamma_site.data(), m.gamma_site.data() + m.gamma_site.size());
    j["gamma_out"] = m.gamma_out;
    j["j1"] = m.j1;
    j["blockade_sites"] = m.blockade_sites;
    j["r_b"] = m.r_b;
    j["r_b_tilde"] = m.r_b_tilde;
    j["warnings"] = m.warnings;
    return j;
}

inline SpinModel spin_model_from_json(const json& j) {
    SpinModel m;
    m.n_sites = j.at("n_sites").get<int>();
    const int N = m.n_sites;
    m.hopping.resize(N, N);
    m.interaction.resize(N, N);
    const auto& hop = j.at("hopping");
    const auto& inter = j.at("interaction");
    if (static_cast<int>(hop.size()) != N || static_cast<int>(inter.size()) != N)
        throw ConfigError("model.json: matrix size does not match n_sites");
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            m.hopping(r, c) = cplx(hop[r][c][0].get<double>(), hop[r][c][1].get<double>());
            m.interaction(r, c) = inter[r][c].get<double>();
        }
    m.beta = j.at("beta").get<double>();
    m.pump = j.at("pump").get<double>();
    const auto g = j.at("gamma_site").get<std::vector<double>>();
    m.gamma_site = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    m.gamma_out = j.at("gamma_out").get<double>();
    m.j1 = j.at("j1").get<double>();
    m.blockade_sites = j.at("blockade_sites").get<int>();
    m.r_b = j.at("r_b").get<double>();
    m.r_b_tilde = j.at("r_b_tilde").get<double>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

inline json model_document(const SpinModel& m, const RunConfig& rc, double tail_weight) {
    json doc = spin_model_to_json(m);
    const PhysicalConfig& p = rc.phys;
    doc["provenance"] = {
        {"config_hash", rc.hash},
        {"hopping_source", p.hopping_source == HoppingSource::bands ? "bands" : "power_law"},
        {"pw_cutoff", p.pw_cutoff},
        {"k_points", p.resolved_k_points()},
        {"quad_order", p.quad_order},
        {"quad_panels", p.quad_panels},
        {"tail_cells", p.tail_cells},
        {"wannier_tail_weight", tail_weight},
    };
    return doc;
}

} // namespace polariton
