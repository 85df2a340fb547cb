#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "activation.hpp"
#include "data.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "network.hpp"

namespace adact {

using json = nlohmann::json;

// The JSON layer stores doubles as native numbers; nlohmann::json emits
// shortest round-trip decimal forms, so parse(dump(x)) reproduces every
// weight bit-exactly.

inline json bank_to_json(const ActivationBank& bank) {
    json units = json::array();
    for (const auto& pla : bank.units) {
        units.push_back({{"r", pla.grid.r},
                         {"s", pla.grid.s},
                         {"ns", pla.grid.ns},
                         {"a", pla.a}});
    }
    return json{{"H", bank.hinge_count()}, {"units", units}};
}

inline ActivationBank bank_from_json(const json& j) {
    ActivationBank bank;
    const std::size_t h = j.at("H").get<std::size_t>();
    for (const auto& ju : j.at("units")) {
        PiecewiseLinearActivation pla;
        pla.grid.r = ju.at("r").get<double>();
        pla.grid.s = ju.at("s").get<double>();
        pla.grid.ns = ju.at("ns").get<std::vector<double>>();
        pla.a = ju.at("a").get<std::vector<double>>();
        if (pla.grid.ns.size() != h || pla.a.size() != h)
            throw Error("activation bank JSON has inconsistent hinge counts");
        pla.grid.delta = pla.grid.ns.size() > 1
                             ? (pla.grid.s - pla.grid.r) / static_cast<double>(pla.grid.ns.size() - 1)
                             : 0.0;
        bank.units.push_back(std::move(pla));
    }
    return bank;
}

inline json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

inline Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    Matrix m(rows, cols);
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) throw Error("matrix JSON has wrong element count");
    m.values() = data;
    return m;
}

/// Network checkpoint: dimensions, all weight matrices (row-major), the
/// activation bank, and the input standardization attached to the run.
inline json checkpoint_to_json(const MlpNetwork& net, const StandardizeStats* stats = nullptr) {
    json j{{"N", net.n_in},
           {"N_h", net.n_hidden},
           {"M", net.n_out},
           {"W", matrix_to_json(net.W)},
           {"W_oh", matrix_to_json(net.W_oh)},
           {"W_oi", matrix_to_json(net.W_oi)},
           {"bank", bank_to_json(net.bank)}};
    if (stats) j["standardize"] = json{{"mean", stats->mean}, {"sd", stats->sd}};
    return j;
}

inline MlpNetwork checkpoint_from_json(const json& j, StandardizeStats* stats = nullptr) {
    MlpNetwork net;
    net.n_in = j.at("N").get<std::size_t>();
    net.n_hidden = j.at("N_h").get<std::size_t>();
    net.n_out = j.at("M").get<std::size_t>();
    net.W = matrix_from_json(j.at("W"));
    net.W_oh = matrix_from_json(j.at("W_oh"));
    net.W_oi = matrix_from_json(j.at("W_oi"));
    net.bank = bank_from_json(j.at("bank"));
    if (net.W.rows() != net.n_hidden || net.W.cols() != net.n_in + 1 ||
        net.W_oh.rows() != net.n_out || net.W_oh.cols() != net.n_hidden ||
        net.W_oi.rows() != net.n_out || net.W_oi.cols() != net.n_in + 1 ||
        net.bank.size() != net.n_hidden)
        throw Error("checkpoint JSON has inconsistent dimensions");
    if (stats && j.contains("standardize")) {
        stats->mean = j.at("standardize").at("mean").get<std::vector<double>>();
        stats->sd = j.at("standardize").at("sd").get<std::vector<double>>();
    }
    return net;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("invalid JSON in '" + path + "': " + e.what());
    }
}

}  // namespace adact
