#include "pacrl/mdp_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pacrl {

using nlohmann::json;

Mdp load_mdp_json(const std::string& text) {
    json j = json::parse(text);
    Mdp m;
    m.num_states = j.at("num_states").get<int>();
    m.num_actions = j.at("num_actions").get<int>();
    m.gamma = j.at("gamma").get<double>();
    if (m.num_states <= 0 || m.num_actions <= 0)
        throw std::runtime_error("mdp: num_states and num_actions must be positive");

    const auto& rw = j.at("rewards");
    const auto& tr = j.at("transitions");
    if (static_cast<int>(rw.size()) != m.num_states)
        throw std::runtime_error("mdp: rewards must have num_states rows");
    if (static_cast<int>(tr.size()) != m.num_states)
        throw std::runtime_error("mdp: transitions must have num_states rows");

    m.rewards.reserve(static_cast<std::size_t>(m.num_states) * m.num_actions);
    m.transitions.reserve(m.rewards.capacity() * m.num_states);
    for (int s = 0; s < m.num_states; ++s) {
        if (static_cast<int>(rw[s].size()) != m.num_actions)
            throw std::runtime_error("mdp: rewards row " + std::to_string(s) + " wrong length");
        if (static_cast<int>(tr[s].size()) != m.num_actions)
            throw std::runtime_error("mdp: transitions row " + std::to_string(s) + " wrong length");
        for (int a = 0; a < m.num_actions; ++a) {
            m.rewards.push_back(rw[s][a].get<double>());
            if (static_cast<int>(tr[s][a].size()) != m.num_states)
                throw std::runtime_error("mdp: transitions[" + std::to_string(s) + "][" +
                                         std::to_string(a) + "] wrong length");
            for (int s2 = 0; s2 < m.num_states; ++s2)
                m.transitions.push_back(tr[s][a][s2].get<double>());
        }
    }

    auto issues = validate_mdp(m);
    if (!issues.empty()) throw std::runtime_error("invalid mdp: " + issues.front());
    return m;
}

Mdp load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_mdp_json(buf.str());
}

std::string mdp_to_json(const Mdp& m) {
    json rw = json::array();
    json tr = json::array();
    for (int s = 0; s < m.num_states; ++s) {
        json rrow = json::array();
        json trow = json::array();
        for (int a = 0; a < m.num_actions; ++a) {
            rrow.push_back(m.reward(s, a));
            json dist = json::array();
            for (int s2 = 0; s2 < m.num_states; ++s2) dist.push_back(m.trans(s, a, s2));
            trow.push_back(std::move(dist));
        }
        rw.push_back(std::move(rrow));
        tr.push_back(std::move(trow));
    }
    json j{{"num_states", m.num_states},
           {"num_actions", m.num_actions},
           {"gamma", m.gamma},
           {"rewards", std::move(rw)},
           {"transitions", std::move(tr)}};
    return j.dump();
}

std::string mdp_fingerprint(const Mdp& m) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(&m.num_states, sizeof m.num_states);
    mix(&m.num_actions, sizeof m.num_actions);
    mix(&m.gamma, sizeof m.gamma);
    mix(m.rewards.data(), m.rewards.size() * sizeof(double));
    mix(m.transitions.data(), m.transitions.size() * sizeof(double));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace pacrl
