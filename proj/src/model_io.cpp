#include "decpomdp/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace decpomdp {

using nlohmann::json;

namespace {

json slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    json j;
    f >> j;
    return j;
}

DecPomdp model_from_json(const json& j) {
    std::vector<AgentSpec> agents;
    for (const auto& a : j.at("agents")) {
        AgentSpec sp;
        sp.actions = a.at("actions").get<std::vector<std::string>>();
        sp.observations = a.at("observations").get<std::vector<std::string>>();
        if (sp.actions.empty() || sp.observations.empty())
            throw std::invalid_argument("agents need at least one action and one observation");
        agents.push_back(std::move(sp));
    }
    DecPomdp m = make_model(j.value("name", std::string("model")), j.at("horizon").get<int>(),
                            j.at("states").get<std::vector<std::string>>(), std::move(agents));
    const int S = m.num_states();
    const long JA = m.num_joint_actions();
    const long JO = m.num_joint_obs();

    const auto& start = j.at("start");
    if (static_cast<int>(start.size()) != S)
        throw std::invalid_argument("start has the wrong number of entries");
    for (int s = 0; s < S; ++s) m.initial_belief[s] = start[s].get<double>();

    const auto& tr = j.at("transitions");
    if (static_cast<int>(tr.size()) != S) throw std::invalid_argument("transitions: bad shape");
    for (int s = 0; s < S; ++s) {
        if (static_cast<long>(tr[s].size()) != JA)
            throw std::invalid_argument("transitions: bad shape");
        for (long a = 0; a < JA; ++a) {
            if (static_cast<int>(tr[s][a].size()) != S)
                throw std::invalid_argument("transitions: bad shape");
            for (int s2 = 0; s2 < S; ++s2) m.p(s, a, s2) = tr[s][a][s2].get<double>();
        }
    }
    const auto& ob = j.at("observations_fn");
    if (static_cast<long>(ob.size()) != JA)
        throw std::invalid_argument("observations_fn: bad shape");
    for (long a = 0; a < JA; ++a) {
        if (static_cast<int>(ob[a].size()) != S)
            throw std::invalid_argument("observations_fn: bad shape");
        for (int s2 = 0; s2 < S; ++s2) {
            if (static_cast<long>(ob[a][s2].size()) != JO)
                throw std::invalid_argument("observations_fn: bad shape");
            for (long o = 0; o < JO; ++o) m.g(a, s2, o) = ob[a][s2][o].get<double>();
        }
    }
    const auto& rw = j.at("rewards");
    if (static_cast<int>(rw.size()) != S) throw std::invalid_argument("rewards: bad shape");
    for (int s = 0; s < S; ++s) {
        if (static_cast<long>(rw[s].size()) != JA)
            throw std::invalid_argument("rewards: bad shape");
        for (long a = 0; a < JA; ++a) m.r(s, a) = rw[s][a].get<double>();
    }
    normalize_model(m);  // rejects out-of-tolerance tables
    return m;
}

}  // namespace

DecPomdp read_model_file(const std::string& path) { return model_from_json(slurp(path)); }

DecPomdp read_model_json(const std::string& text) { return model_from_json(json::parse(text)); }

std::string write_model_json(const DecPomdp& m) {
    json j;
    j["name"] = m.name;
    j["horizon"] = m.horizon;
    j["states"] = m.states;
    json agents = json::array();
    for (const auto& a : m.agents)
        agents.push_back({{"actions", a.actions}, {"observations", a.observations}});
    j["agents"] = std::move(agents);
    j["start"] = m.initial_belief;
    const int S = m.num_states();
    const long JA = m.num_joint_actions();
    const long JO = m.num_joint_obs();
    json tr = json::array();
    for (int s = 0; s < S; ++s) {
        json ja = json::array();
        for (long a = 0; a < JA; ++a) {
            json row = json::array();
            for (int s2 = 0; s2 < S; ++s2) row.push_back(m.p(s, a, s2));
            ja.push_back(std::move(row));
        }
        tr.push_back(std::move(ja));
    }
    j["transitions"] = std::move(tr);
    json ob = json::array();
    for (long a = 0; a < JA; ++a) {
        json per_s = json::array();
        for (int s2 = 0; s2 < S; ++s2) {
            json row = json::array();
            for (long o = 0; o < JO; ++o) row.push_back(m.g(a, s2, o));
            per_s.push_back(std::move(row));
        }
        ob.push_back(std::move(per_s));
    }
    j["observations_fn"] = std::move(ob);
    json rw = json::array();
    for (int s = 0; s < S; ++s) {
        json row = json::array();
        for (long a = 0; a < JA; ++a) row.push_back(m.r(s, a));
        rw.push_back(std::move(row));
    }
    j["rewards"] = std::move(rw);
    return j.dump(2);
}

void write_model_file(const DecPomdp& model, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << write_model_json(model) << "\n";
}

namespace {

int label_index(const std::vector<std::string>& labels, const std::string& s,
                const char* what) {
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] == s) return static_cast<int>(k);
    throw std::invalid_argument(std::string("unknown ") + what + " label: " + s);
}

JointSequencePolicy policy_from_json(const json& j, const DecPomdp& model,
                                     const HistorySpace& space) {
    const auto& per_agent = j.is_array() ? j : j.at("agents");
    if (static_cast<int>(per_agent.size()) != model.num_agents())
        throw std::invalid_argument("policy file does not cover every agent");
    JointSequencePolicy out;
    out.agents.resize(model.num_agents());
    for (int i = 0; i < model.num_agents(); ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        out.agents[i].agent = i;
        out.agents[i].weights.assign(sp.num_histories(), 0.0);
        for (const auto& entry : per_agent[i]) {
            const auto& seq = entry.at("history");
            if (seq.empty() || seq.size() % 2 == 0)
                throw std::invalid_argument("history label sequences alternate action, "
                                            "observation and end in an action");
            // walk the history tree by labels
            int a0 = label_index(model.agents[i].actions, seq[0].get<std::string>(), "action");
            int h = a0;  // length-1 histories are id 0..|A|-1 in action order
            for (std::size_t k = 1; k + 1 < seq.size(); k += 2) {
                int o = label_index(model.agents[i].observations, seq[k].get<std::string>(),
                                    "observation");
                int a = label_index(model.agents[i].actions, seq[k + 1].get<std::string>(),
                                    "action");
                int iset = sp.child_iset[static_cast<std::size_t>(h) * sp.num_obs + o];
                h = sp.info_sets[iset].members[a];
            }
            out.agents[i].weights[h] = entry.at("weight").get<double>();
        }
    }
    return out;
}

}  // namespace

JointSequencePolicy read_policy_file(const std::string& path, const DecPomdp& model,
                                     const HistorySpace& space) {
    return policy_from_json(slurp(path), model, space);
}

JointSequencePolicy read_policy_json(const std::string& text, const DecPomdp& model,
                                     const HistorySpace& space) {
    return policy_from_json(json::parse(text), model, space);
}

std::string write_policy_json(const JointSequencePolicy& policy, const DecPomdp& model,
                              const HistorySpace& space) {
    json per_agent = json::array();
    for (int i = 0; i < model.num_agents(); ++i) {
        const AgentHistorySpace& sp = space.agents[i];
        json list = json::array();
        for (int h = 0; h < sp.num_histories(); ++h) {
            double w = policy.agents[i].weights[h];
            if (w == 0.0) continue;
            json labels = json::array();
            auto els = sp.elements(h);
            for (std::size_t k = 0; k < els.size(); ++k)
                labels.push_back(k % 2 == 0 ? model.agents[i].actions[els[k]]
                                            : model.agents[i].observations[els[k]]);
            list.push_back({{"history", std::move(labels)}, {"weight", w}});
        }
        per_agent.push_back(std::move(list));
    }
    json j;
    j["agents"] = std::move(per_agent);
    return j.dump(2);
}

void write_policy_file(const JointSequencePolicy& policy, const DecPomdp& model,
                       const HistorySpace& space, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << write_policy_json(policy, model, space) << "\n";
}

}  // namespace decpomdp
