#include "hynpc/pddl.hpp"

#include <sstream>

namespace hynpc::pddl {

namespace {

constexpr const char* kIndent = "    ";

std::string indent(int level) {
    std::string out;
    for (int i = 0; i < level; ++i) out += kIndent;
    return out;
}

void write_params(std::ostringstream& out, const std::vector<TypedName>& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i > 0) out << ' ';
        out << params[i].name << " - " << params[i].type;
    }
}

// `(and ...)` with one literal per line, closing paren at `level`.
void write_conjunction(std::ostringstream& out, const std::vector<Literal>& literals, int level) {
    if (literals.empty()) {
        out << "(and)";
        return;
    }
    out << "(and\n";
    for (const auto& literal : literals) out << indent(level + 1) << to_string(literal) << '\n';
    out << indent(level) << ')';
}

}  // namespace

std::string print_domain(const Domain& domain) {
    std::ostringstream out;
    out << "(define (domain " << domain.name << ")\n";
    if (!domain.types.order().empty()) {
        out << indent(1) << "(:types\n";
        for (const auto& name : domain.types.order()) {
            out << indent(2) << name << " - " << *domain.types.parent_of(name) << '\n';
        }
        out << indent(1) << ")\n";
    }
    if (domain.predicates.empty()) {
        out << indent(1) << "(:predicates)\n";
    } else {
        out << indent(1) << "(:predicates\n";
        for (const auto& p : domain.predicates) {
            out << indent(2) << '(' << p.name;
            if (!p.params.empty()) out << ' ';
            write_params(out, p.params);
            out << ")\n";
        }
        out << indent(1) << ")\n";
    }
    for (const auto& a : domain.actions) {
        out << indent(1) << "(:action " << a.name << '\n';
        out << indent(2) << ":parameters (";
        write_params(out, a.params);
        out << ")\n";
        out << indent(2) << ":precondition ";
        write_conjunction(out, a.precondition, 2);
        out << '\n' << indent(2) << ":effect ";
        write_conjunction(out, a.effect, 2);
        out << '\n' << indent(1) << ")\n";
    }
    out << ")\n";
    return out.str();
}

std::string print_problem(const ProblemSpec& problem) {
    std::ostringstream out;
    out << "(define (problem " << problem.name << ")\n";
    out << indent(1) << "(:domain " << problem.domain_name << ")\n";
    if (problem.objects.empty()) {
        out << indent(1) << "(:objects)\n";
    } else {
        out << indent(1) << "(:objects\n";
        for (const auto& o : problem.objects) out << indent(2) << o.name << " - " << o.type << '\n';
        out << indent(1) << ")\n";
    }
    if (problem.init.empty()) {
        out << indent(1) << "(:init)\n";
    } else {
        out << indent(1) << "(:init\n";
        for (const auto& atom : problem.init) out << indent(2) << to_string(atom) << '\n';
        out << indent(1) << ")\n";
    }
    out << indent(1) << "(:goal ";
    write_conjunction(out, problem.goal, 1);
    out << ")\n";
    out << ")\n";
    return out.str();
}

}  // namespace hynpc::pddl
