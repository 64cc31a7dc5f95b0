#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hynpc::pddl {

inline constexpr std::string_view kRootType = "object";

/// Single-inheritance type hierarchy rooted at `object`.
class TypeTree {
public:
    /// Declares `name` with the given parent. Re-declaring with the same parent is a no-op.
    void add(const std::string& name, const std::string& parent = std::string(kRootType));

    bool contains(std::string_view name) const;
    /// True when `sub` equals `super` or `super` is an ancestor of `sub`.
    bool is_subtype(std::string_view sub, std::string_view super) const;
    std::optional<std::string> parent_of(std::string_view name) const;

    /// Declared types (excluding the implicit root), with their parents.
    const std::map<std::string, std::string, std::less<>>& parents() const { return parent_; }
    /// Declaration order, used by the printer.
    const std::vector<std::string>& order() const { return order_; }

    bool operator==(const TypeTree& other) const { return parent_ == other.parent_; }

private:
    std::map<std::string, std::string, std::less<>> parent_;
    std::vector<std::string> order_;
};

struct TypedName {
    std::string name;
    std::string type;

    auto operator<=>(const TypedName&) const = default;
};

struct PredicateSchema {
    std::string name;
    std::vector<TypedName> params;

    bool operator==(const PredicateSchema&) const = default;
};

/// Predicate applied to terms. Terms starting with '?' are variables.
struct Atom {
    std::string predicate;
    std::vector<std::string> args;

    auto operator<=>(const Atom&) const = default;
};

struct Literal {
    bool positive = true;
    Atom atom;

    auto operator<=>(const Literal&) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> params;
    std::vector<Literal> precondition;
    std::vector<Literal> effect;

    bool operator==(const ActionSchema&) const = default;
};

struct Domain {
    std::string name;
    TypeTree types;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;

    const PredicateSchema* find_predicate(std::string_view name) const;
    const ActionSchema* find_action(std::string_view name) const;

    bool operator==(const Domain&) const = default;
};

struct ProblemSpec {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;
    std::set<Atom> init;
    std::vector<Literal> goal;

    const TypedName* find_object(std::string_view name) const;

    bool operator==(const ProblemSpec&) const = default;
};

enum class ErrorKind {
    syntax,
    unknown_type,
    duplicate,
    unsupported,
    undeclared_object,
    undeclared_predicate,
    arity_mismatch,
    type_mismatch,
    domain_mismatch,
};

std::string_view to_string(ErrorKind kind);

/// Structured parse/type-check failure. `line` and `column` are 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(ErrorKind kind, const std::string& message, std::size_t line = 0, std::size_t column = 0);

    ErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// Message without the kind/position prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
};

struct ProblemOptions {
    /// A domain-name mismatch is an error instead of a warning.
    bool strict_domain_name = false;
    /// Receives warnings when non-null.
    std::vector<std::string>* warnings = nullptr;
};

Domain parse_domain(std::string_view text);
ProblemSpec parse_problem(std::string_view text, const Domain& domain, const ProblemOptions& options = {});

/// Type-checks a problem built in memory (as the parser would). Throws ParseError.
void check_problem(const ProblemSpec& problem, const Domain& domain);

/// Checks one ground literal against the domain and the problem's objects. Throws ParseError.
void check_ground_literal(const Literal& literal, const Domain& domain, const ProblemSpec& problem);

std::string print_domain(const Domain& domain);
std::string print_problem(const ProblemSpec& problem);

std::string to_string(const Atom& atom);
std::string to_string(const Literal& literal);

}  // namespace hynpc::pddl
