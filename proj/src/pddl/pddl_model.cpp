#include "hynpc/pddl.hpp"

#include <algorithm>

namespace hynpc::pddl {

void TypeTree::add(const std::string& name, const std::string& parent) {
    auto [it, inserted] = parent_.emplace(name, parent);
    if (inserted) {
        order_.push_back(name);
    } else {
        it->second = parent;
    }
}

bool TypeTree::contains(std::string_view name) const {
    return name == kRootType || parent_.find(name) != parent_.end();
}

bool TypeTree::is_subtype(std::string_view sub, std::string_view super) const {
    if (super == kRootType) return contains(sub);
    std::string_view current = sub;
    // The hierarchy is acyclic, but bound the walk anyway.
    for (std::size_t hops = 0; hops <= parent_.size(); ++hops) {
        if (current == super) return true;
        auto it = parent_.find(current);
        if (it == parent_.end()) return false;
        current = it->second;
    }
    return false;
}

std::optional<std::string> TypeTree::parent_of(std::string_view name) const {
    auto it = parent_.find(name);
    if (it == parent_.end()) return std::nullopt;
    return it->second;
}

const PredicateSchema* Domain::find_predicate(std::string_view name) const {
    auto it = std::find_if(predicates.begin(), predicates.end(),
                           [&](const PredicateSchema& p) { return p.name == name; });
    return it == predicates.end() ? nullptr : &*it;
}

const ActionSchema* Domain::find_action(std::string_view name) const {
    auto it = std::find_if(actions.begin(), actions.end(),
                           [&](const ActionSchema& a) { return a.name == name; });
    return it == actions.end() ? nullptr : &*it;
}

const TypedName* ProblemSpec::find_object(std::string_view name) const {
    auto it = std::find_if(objects.begin(), objects.end(),
                           [&](const TypedName& o) { return o.name == name; });
    return it == objects.end() ? nullptr : &*it;
}

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::syntax: return "syntax";
        case ErrorKind::unknown_type: return "unknown-type";
        case ErrorKind::duplicate: return "duplicate";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::undeclared_object: return "undeclared-object";
        case ErrorKind::undeclared_predicate: return "undeclared-predicate";
        case ErrorKind::arity_mismatch: return "arity-mismatch";
        case ErrorKind::type_mismatch: return "type-mismatch";
        case ErrorKind::domain_mismatch: return "domain-mismatch";
    }
    return "unknown";
}

namespace {

std::string format_message(ErrorKind kind, const std::string& message, std::size_t line, std::size_t column) {
    std::string out = "pddl ";
    out += to_string(kind);
    out += " error";
    if (line > 0) {
        out += " at " + std::to_string(line) + ":" + std::to_string(column);
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

ParseError::ParseError(ErrorKind kind, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(format_message(kind, message, line, column)),
      kind_(kind),
      detail_(message),
      line_(line),
      column_(column) {}

std::string to_string(const Atom& atom) {
    std::string out = "(" + atom.predicate;
    for (const auto& arg : atom.args) {
        out += ' ';
        out += arg;
    }
    out += ')';
    return out;
}

std::string to_string(const Literal& literal) {
    if (literal.positive) return to_string(literal.atom);
    return "(not " + to_string(literal.atom) + ")";
}

void check_ground_literal(const Literal& literal, const Domain& domain, const ProblemSpec& problem) {
    const Atom& atom = literal.atom;
    const PredicateSchema* schema = domain.find_predicate(atom.predicate);
    if (schema == nullptr) {
        throw ParseError(ErrorKind::undeclared_predicate, "undeclared predicate '" + atom.predicate + "'");
    }
    if (schema->params.size() != atom.args.size()) {
        throw ParseError(ErrorKind::arity_mismatch,
                         "predicate '" + atom.predicate + "' expects " + std::to_string(schema->params.size()) +
                             " argument(s), got " + std::to_string(atom.args.size()));
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const TypedName* object = problem.find_object(atom.args[i]);
        if (object == nullptr) {
            throw ParseError(ErrorKind::undeclared_object,
                             "undeclared object '" + atom.args[i] + "' in " + to_string(literal));
        }
        if (!domain.types.is_subtype(object->type, schema->params[i].type)) {
            throw ParseError(ErrorKind::type_mismatch, "in " + to_string(literal) + ": object '" + object->name +
                                                           "' has type " + object->type + ", expected " +
                                                           schema->params[i].type);
        }
    }
}

void check_problem(const ProblemSpec& problem, const Domain& domain) {
    std::set<std::string, std::less<>> seen;
    for (const auto& object : problem.objects) {
        if (!seen.insert(object.name).second) {
            throw ParseError(ErrorKind::duplicate, "duplicate object '" + object.name + "'");
        }
        if (!domain.types.contains(object.type)) {
            throw ParseError(ErrorKind::unknown_type,
                             "object '" + object.name + "' has unknown type '" + object.type + "'");
        }
    }
    for (const auto& atom : problem.init) {
        check_ground_literal(Literal{true, atom}, domain, problem);
    }
    for (const auto& literal : problem.goal) {
        check_ground_literal(literal, domain, problem);
    }
}

}  // namespace hynpc::pddl
