#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qic/channels.hpp"

namespace qic {

using Channel = std::variant<CcqqChannel, CcqMac>;

namespace detail {

inline nlohmann::json matrix_to_json(const Mat& m) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json rrow = nlohmann::json::array(), irow = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rrow.push_back(m(r, c).real());
            irow.push_back(m(r, c).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return {{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline Mat matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
        throw input_error("channel file: matrix needs dim, re, im");
    int d = j.at("dim").get<int>();
    if (d < 1) throw input_error("channel file: invalid matrix dim");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != d || static_cast<int>(im.size()) != d)
        throw input_error("channel file: matrix rows do not match dim");
    Mat m(d, d);
    for (int r = 0; r < d; ++r) {
        if (static_cast<int>(re[r].size()) != d || static_cast<int>(im[r].size()) != d)
            throw input_error("channel file: matrix columns do not match dim");
        for (int c = 0; c < d; ++c)
            m(r, c) = cx(re[r][c].get<double>(), im[r][c].get<double>());
    }
    return m;
}

inline std::vector<Mat> states_from_json(const nlohmann::json& j, const std::vector<int>& alphabets) {
    if (!j.contains("states") || !j.at("states").is_array())
        throw input_error("channel file: missing states array");
    std::size_t total = radix_size(alphabets);
    std::vector<Mat> states(total);
    std::vector<bool> seen(total, false);
    for (const auto& entry : j.at("states")) {
        if (!entry.contains("in") || !entry.contains("rho"))
            throw input_error("channel file: state entry needs in and rho");
        std::vector<int> in = entry.at("in").get<std::vector<int>>();
        if (in.size() != alphabets.size())
            throw input_error("channel file: input tuple arity mismatch");
        for (std::size_t k = 0; k < in.size(); ++k)
            if (in[k] < 0 || in[k] >= alphabets[k])
                throw input_error("channel file: input symbol out of range");
        std::size_t flat = flat_index(in, alphabets);
        if (seen[flat]) throw input_error("channel file: duplicate input tuple");
        seen[flat] = true;
        states[flat] = matrix_from_json(entry.at("rho"));
    }
    for (std::size_t i = 0; i < total; ++i)
        if (!seen[i]) throw input_error("channel file: missing state for some input tuple");
    return states;
}

} // namespace detail

inline Channel load_channel_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("alphabets") || !j.contains("dims"))
        throw input_error("channel file: missing kind, alphabets, or dims");
    std::string kind = j.at("kind").get<std::string>();
    std::vector<int> alphabets = j.at("alphabets").get<std::vector<int>>();
    std::vector<int> dims = j.at("dims").get<std::vector<int>>();
    if (kind == "ccqq") {
        if (alphabets.size() != 2 || dims.size() != 2)
            throw input_error("channel file: ccqq needs two alphabets and two dims");
        return CcqqChannel(alphabets, dims, detail::states_from_json(j, alphabets));
    }
    if (kind == "ccq" || kind == "cccq") {
        std::size_t want = kind == "ccq" ? 2 : 3;
        if (alphabets.size() != want || dims.size() != 1)
            throw input_error("channel file: " + kind + " alphabet/dim arity mismatch");
        return CcqMac(alphabets, dims[0], detail::states_from_json(j, alphabets));
    }
    throw input_error("channel file: unknown kind " + kind);
}

inline Channel load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("load_channel: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("load_channel: invalid JSON in " + path + ": " + e.what());
    }
    return load_channel_json(j);
}

inline nlohmann::json save_channel_json(const Channel& ch) {
    nlohmann::json j;
    nlohmann::json states = nlohmann::json::array();
    if (std::holds_alternative<CcqqChannel>(ch)) {
        const auto& c = std::get<CcqqChannel>(ch);
        j["kind"] = "ccqq";
        j["alphabets"] = c.alphabets();
        j["dims"] = c.dims();
        for (std::size_t flat = 0; flat < c.states().size(); ++flat)
            states.push_back({{"in", unflatten_index(flat, c.alphabets())},
                              {"rho", detail::matrix_to_json(c.states()[flat])}});
    } else {
        const auto& c = std::get<CcqMac>(ch);
        j["kind"] = c.senders() == 2 ? "ccq" : "cccq";
        j["alphabets"] = c.alphabets();
        j["dims"] = std::vector<int>{c.dim()};
        for (std::size_t flat = 0; flat < c.states().size(); ++flat)
            states.push_back({{"in", unflatten_index(flat, c.alphabets())},
                              {"rho", detail::matrix_to_json(c.states()[flat])}});
    }
    j["states"] = std::move(states);
    return j;
}

inline void save_channel(const Channel& ch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("save_channel: cannot open " + path);
    out << save_channel_json(ch).dump(2) << "\n";
}

} // namespace qic
