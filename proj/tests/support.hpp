#pragma once

#include "hynpc/pddl.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace test_support {

inline std::string fixture(const std::string& name) { return std::string(HYNPC_FIXTURE_DIR) + "/" + name; }
inline std::string golden(const std::string& name) { return std::string(HYNPC_GOLDEN_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RandomInstance {
    hynpc::pddl::Domain domain;
    hynpc::pddl::ProblemSpec problem;
};

template <class Rng>
std::size_t pick(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <class Rng>
bool coin(Rng& rng, double p) {
    return std::bernoulli_distribution(p)(rng);
}

inline std::size_t ground_action_count(const hynpc::pddl::Domain& d, const hynpc::pddl::ProblemSpec& p) {
    std::size_t total = 0;
    for (const auto& a : d.actions) {
        std::size_t n = 1;
        for (const auto& param : a.params) {
            std::size_t fit = 0;
            for (const auto& o : p.objects) fit += d.types.is_subtype(o.type, param.type);
            n *= fit;
        }
        total += n;
    }
    return total;
}

/// Small typed STRIPS instance: up to 6 objects, at most `max_ground` ground actions,
/// negative preconditions and goals allowed.
template <class Rng>
RandomInstance random_instance(Rng& rng, std::size_t max_ground = 50) {
    using namespace hynpc::pddl;
    for (;;) {
        RandomInstance out;
        Domain& d = out.domain;
        d.name = "rnd";
        d.types.add("ta");
        d.types.add("tb");
        d.types.add("tc", "ta");
        const std::vector<std::string> types{"object", "ta", "tb", "tc"};
        const std::vector<std::string> leaf{"ta", "tb", "tc"};

        const std::size_t num_preds = 2 + pick(rng, 3);
        for (std::size_t i = 0; i < num_preds; ++i) {
            PredicateSchema ps{"p" + std::to_string(i), {}};
            const std::size_t arity = pick(rng, 3);
            for (std::size_t k = 0; k < arity; ++k) ps.params.push_back({"?x" + std::to_string(k), types[pick(rng, types.size())]});
            d.predicates.push_back(ps);
        }

        const std::size_t num_actions = 1 + pick(rng, 3);
        for (std::size_t i = 0; i < num_actions; ++i) {
            ActionSchema a;
            a.name = "a" + std::to_string(i);
            const std::size_t arity = pick(rng, 3);
            for (std::size_t k = 0; k < arity; ++k) a.params.push_back({"?v" + std::to_string(k), types[pick(rng, types.size())]});
            // Literals over predicates whose argument types the parameters can fill.
            auto make_atom = [&](Atom& atom) {
                const PredicateSchema& ps = d.predicates[pick(rng, d.predicates.size())];
                atom.predicate = ps.name;
                for (const auto& slot : ps.params) {
                    std::vector<std::string> fits;
                    for (const auto& param : a.params) {
                        if (d.types.is_subtype(param.type, slot.type)) fits.push_back(param.name);
                    }
                    if (fits.empty()) return false;
                    atom.args.push_back(fits[pick(rng, fits.size())]);
                }
                return true;
            };
            const std::size_t num_pre = pick(rng, 3);
            for (std::size_t k = 0; k < num_pre; ++k) {
                Literal l{!coin(rng, 0.25), {}};
                if (make_atom(l.atom)) a.precondition.push_back(l);
            }
            const std::size_t num_eff = 1 + pick(rng, 3);
            for (std::size_t k = 0; k < num_eff; ++k) {
                Literal l{!coin(rng, 0.35), {}};
                if (!make_atom(l.atom)) continue;
                bool clash = false;
                for (const auto& e : a.effect) clash = clash || e.atom == l.atom;
                if (!clash) a.effect.push_back(l);
            }
            if (a.effect.empty()) continue;
            d.actions.push_back(a);
        }
        if (d.actions.empty()) continue;

        ProblemSpec& p = out.problem;
        p.name = "rnd-problem";
        p.domain_name = d.name;
        const std::size_t num_objects = 1 + pick(rng, 6);
        for (std::size_t i = 0; i < num_objects; ++i) p.objects.push_back({"o" + std::to_string(i), leaf[pick(rng, leaf.size())]});
        if (ground_action_count(d, p) > max_ground) continue;

        // Every well-typed ground atom, then a random subset as init and a few goal literals.
        std::vector<Atom> atoms;
        for (const auto& ps : d.predicates) {
            std::vector<std::vector<std::string>> tuples{{}};
            for (const auto& slot : ps.params) {
                std::vector<std::vector<std::string>> next;
                for (const auto& t : tuples) {
                    for (const auto& o : p.objects) {
                        if (!d.types.is_subtype(o.type, slot.type)) continue;
                        auto u = t;
                        u.push_back(o.name);
                        next.push_back(u);
                    }
                }
                tuples = std::move(next);
            }
            for (auto& t : tuples) atoms.push_back({ps.name, t});
        }
        if (atoms.empty()) continue;
        for (const auto& atom : atoms) {
            if (coin(rng, 0.3)) p.init.insert(atom);
        }
        const std::size_t num_goals = 1 + pick(rng, 3);
        for (std::size_t i = 0; i < num_goals; ++i) p.goal.push_back({!coin(rng, 0.2), atoms[pick(rng, atoms.size())]});
        return out;
    }
}

}  // namespace test_support
