#include "hynpc/pddl.hpp"

#include <algorithm>
#include <cctype>

namespace hynpc::pddl {

namespace {

// Deeper nesting than this is never needed by the supported subset.
constexpr std::size_t kMaxDepth = 64;

struct Node {
    bool is_list = false;
    std::string text;
    std::vector<Node> children;
    std::size_t line = 0;
    std::size_t column = 0;
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

[[noreturn]] void fail(ErrorKind kind, const std::string& message, const Node& at) {
    throw ParseError(kind, message, at.line, at.column);
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    Node read_document() {
        skip_space();
        if (pos_ >= text_.size()) {
            throw ParseError(ErrorKind::syntax, "empty input, expected '('", line_, column_);
        }
        Node root = read_node(0);
        skip_space();
        if (pos_ < text_.size()) {
            throw ParseError(ErrorKind::syntax, "trailing content after closing ')'", line_, column_);
        }
        return root;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Node read_node(std::size_t depth) {
        Node node;
        node.line = line_;
        node.column = column_;
        char c = text_[pos_];
        if (c == ')') {
            throw ParseError(ErrorKind::syntax, "unexpected ')'", line_, column_);
        }
        if (c != '(') {
            std::size_t start = pos_;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
                advance();
            }
            node.text = std::string(text_.substr(start, pos_ - start));
            return node;
        }
        if (depth >= kMaxDepth) {
            throw ParseError(ErrorKind::syntax, "nesting too deep", line_, column_);
        }
        node.is_list = true;
        advance();
        for (;;) {
            skip_space();
            if (pos_ >= text_.size()) {
                throw ParseError(ErrorKind::syntax, "unexpected end of input, expected ')'", line_, column_);
            }
            if (text_[pos_] == ')') {
                advance();
                return node;
            }
            node.children.push_back(read_node(depth + 1));
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

bool is_identifier(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

bool is_variable(std::string_view s) { return s.size() > 1 && s.front() == '?' && is_identifier(s.substr(1)); }

bool is_keyword(const Node& n, std::string_view keyword) { return !n.is_list && lower(n.text) == keyword; }

const Node& expect_list(const Node& n, const std::string& what) {
    if (!n.is_list) fail(ErrorKind::syntax, "expected '(' starting " + what + ", got '" + n.text + "'", n);
    return n;
}

std::string expect_identifier(const Node& n, const std::string& what) {
    if (n.is_list) fail(ErrorKind::syntax, "expected " + what + ", got a list", n);
    if (!is_identifier(n.text)) fail(ErrorKind::syntax, "expected " + what + ", got '" + n.text + "'", n);
    return n.text;
}

std::string canonical_type(const std::string& name) { return lower(name) == kRootType ? std::string(kRootType) : name; }

// `a b - T c` style lists; names without a type get `object`.
std::vector<TypedName> parse_typed_list(const std::vector<Node>& items, std::size_t start, bool variables,
                                        const std::string& what) {
    std::vector<TypedName> out;
    std::vector<std::string> pending;
    for (std::size_t i = start; i < items.size(); ++i) {
        const Node& item = items[i];
        if (item.is_list) fail(ErrorKind::syntax, "unexpected list in " + what, item);
        if (item.text == "-") {
            if (pending.empty()) fail(ErrorKind::syntax, "'-' without preceding names in " + what, item);
            if (i + 1 >= items.size()) fail(ErrorKind::syntax, "expected type name after '-' in " + what, item);
            const Node& type = items[++i];
            if (type.is_list) {
                if (!type.children.empty() && is_keyword(type.children.front(), "either")) {
                    fail(ErrorKind::unsupported, "unsupported PDDL feature 'either' types", type);
                }
                fail(ErrorKind::syntax, "expected type name after '-' in " + what, type);
            }
            std::string type_name = canonical_type(expect_identifier(type, "type name"));
            for (auto& name : pending) out.push_back({std::move(name), type_name});
            pending.clear();
            continue;
        }
        bool ok = variables ? is_variable(item.text) : is_identifier(item.text);
        if (!ok) {
            fail(ErrorKind::syntax,
                 std::string("expected ") + (variables ? "variable" : "name") + " in " + what + ", got '" +
                     item.text + "'",
                 item);
        }
        pending.push_back(item.text);
    }
    for (auto& name : pending) out.push_back({std::move(name), std::string(kRootType)});
    return out;
}

const std::set<std::string> kUnsupportedConnectives = {"or",      "imply",    "exists",   "forall", "when",
                                                       "=",       "increase", "decrease", "assign", "scale-up",
                                                       "scale-down", "at",   "over",     "preference"};

Atom parse_atom(const Node& n, const std::string& what) {
    if (!n.is_list || n.children.empty()) fail(ErrorKind::syntax, "expected atom in " + what, n);
    const Node& head = n.children.front();
    if (head.is_list) fail(ErrorKind::syntax, "expected predicate name in " + what, head);
    std::string head_lower = lower(head.text);
    if (kUnsupportedConnectives.count(head_lower)) {
        fail(ErrorKind::unsupported, "unsupported PDDL feature '" + head.text + "' in " + what, head);
    }
    Atom atom;
    atom.predicate = expect_identifier(head, "predicate name");
    for (std::size_t i = 1; i < n.children.size(); ++i) {
        const Node& arg = n.children[i];
        if (arg.is_list) fail(ErrorKind::syntax, "expected term in " + what + ", got a list", arg);
        if (!is_identifier(arg.text) && !is_variable(arg.text)) {
            fail(ErrorKind::syntax, "expected term in " + what + ", got '" + arg.text + "'", arg);
        }
        atom.args.push_back(arg.text);
    }
    return atom;
}

Literal parse_literal(const Node& n, const std::string& what) {
    if (n.is_list && !n.children.empty() && is_keyword(n.children.front(), "not")) {
        if (n.children.size() != 2) fail(ErrorKind::syntax, "'not' takes exactly one atom in " + what, n);
        const Node& inner = n.children[1];
        if (inner.is_list && !inner.children.empty() &&
            (is_keyword(inner.children.front(), "not") || is_keyword(inner.children.front(), "and"))) {
            fail(ErrorKind::unsupported, "unsupported PDDL feature: negation of a compound formula in " + what,
                 inner);
        }
        return Literal{false, parse_atom(inner, what)};
    }
    return Literal{true, parse_atom(n, what)};
}

void parse_conjunction_into(const Node& n, const std::string& what, std::vector<Literal>& out) {
    if (!n.is_list) fail(ErrorKind::syntax, "expected '(' starting " + what + ", got '" + n.text + "'", n);
    if (n.children.empty()) return;  // `()` is the empty conjunction
    if (is_keyword(n.children.front(), "and")) {
        for (std::size_t i = 1; i < n.children.size(); ++i) parse_conjunction_into(n.children[i], what, out);
        return;
    }
    out.push_back(parse_literal(n, what));
}

std::vector<Literal> parse_conjunction(const Node& n, const std::string& what) {
    std::vector<Literal> out;
    parse_conjunction_into(n, what, out);
    return out;
}

const std::set<std::string> kUnsupportedDomainSections = {":constants", ":functions", ":durative-action",
                                                          ":derived",   ":constraints", ":timeless",
                                                          ":process",   ":event"};

void parse_types_section(const Node& section, Domain& domain) {
    auto typed = parse_typed_list(section.children, 1, false, ":types");
    std::set<std::string> declared;
    for (const auto& t : typed) {
        if (t.name == kRootType || lower(t.name) == kRootType) continue;
        if (!declared.insert(t.name).second) {
            fail(ErrorKind::duplicate, "duplicate type '" + t.name + "'", section);
        }
    }
    for (const auto& t : typed) {
        if (lower(t.name) == kRootType) continue;
        if (t.type != kRootType && !declared.count(t.type)) {
            fail(ErrorKind::unknown_type, "unknown type '" + t.type + "' in :types", section);
        }
        domain.types.add(t.name, t.type);
    }
    // Reject cycles such as `A - B  B - A`.
    for (const auto& [name, parent] : domain.types.parents()) {
        std::string current = name;
        std::size_t hops = 0;
        while (current != kRootType) {
            if (++hops > domain.types.parents().size()) {
                fail(ErrorKind::syntax, "cyclic type hierarchy involving '" + name + "'", section);
            }
            current = *domain.types.parent_of(current);
        }
    }
}

void check_params(const std::vector<TypedName>& params, const Domain& domain, const Node& at,
                  const std::string& owner) {
    std::set<std::string> names;
    for (const auto& p : params) {
        if (!names.insert(p.name).second) {
            fail(ErrorKind::duplicate, "duplicate parameter '" + p.name + "' in " + owner, at);
        }
        if (!domain.types.contains(p.type)) {
            fail(ErrorKind::unknown_type, "unknown type '" + p.type + "' in " + owner, at);
        }
    }
}

void parse_predicates_section(const Node& section, Domain& domain) {
    for (std::size_t i = 1; i < section.children.size(); ++i) {
        const Node& decl = expect_list(section.children[i], "predicate declaration");
        if (decl.children.empty()) fail(ErrorKind::syntax, "empty predicate declaration", decl);
        PredicateSchema schema;
        schema.name = expect_identifier(decl.children.front(), "predicate name");
        schema.params = parse_typed_list(decl.children, 1, true, "predicate '" + schema.name + "'");
        check_params(schema.params, domain, decl, "predicate '" + schema.name + "'");
        if (domain.find_predicate(schema.name) != nullptr) {
            fail(ErrorKind::duplicate, "duplicate predicate '" + schema.name + "'", decl);
        }
        domain.predicates.push_back(std::move(schema));
    }
}

void check_schema_literal(const Literal& literal, const ActionSchema& action, const Domain& domain,
                          const Node& at) {
    const std::string where = "action '" + action.name + "'";
    const PredicateSchema* schema = domain.find_predicate(literal.atom.predicate);
    if (schema == nullptr) {
        fail(ErrorKind::undeclared_predicate,
             "undeclared predicate '" + literal.atom.predicate + "' in " + where, at);
    }
    if (schema->params.size() != literal.atom.args.size()) {
        fail(ErrorKind::arity_mismatch,
             "predicate '" + schema->name + "' expects " + std::to_string(schema->params.size()) +
                 " argument(s) in " + where,
             at);
    }
    for (std::size_t i = 0; i < literal.atom.args.size(); ++i) {
        const std::string& term = literal.atom.args[i];
        if (!is_variable(term)) {
            fail(ErrorKind::unsupported, "unsupported PDDL feature: constant '" + term + "' in " + where, at);
        }
        auto param = std::find_if(action.params.begin(), action.params.end(),
                                  [&](const TypedName& p) { return p.name == term; });
        if (param == action.params.end()) {
            fail(ErrorKind::syntax, "variable '" + term + "' is not a parameter of " + where, at);
        }
        if (!domain.types.is_subtype(param->type, schema->params[i].type)) {
            fail(ErrorKind::type_mismatch,
                 "in " + where + ": " + term + " has type " + param->type + ", predicate '" + schema->name +
                     "' expects " + schema->params[i].type,
                 at);
        }
    }
}

void parse_action(const Node& section, Domain& domain) {
    if (section.children.size() < 2) fail(ErrorKind::syntax, "expected action name after :action", section);
    ActionSchema action;
    action.name = expect_identifier(section.children[1], "action name");
    bool has_params = false;
    bool has_effect = false;
    const Node* pre_node = nullptr;
    const Node* eff_node = nullptr;
    for (std::size_t i = 2; i < section.children.size(); i += 2) {
        const Node& key = section.children[i];
        if (key.is_list) fail(ErrorKind::syntax, "expected :parameters, :precondition or :effect", key);
        if (i + 1 >= section.children.size()) {
            fail(ErrorKind::syntax, "missing value after '" + key.text + "' in action '" + action.name + "'", key);
        }
        const Node& value = section.children[i + 1];
        std::string k = lower(key.text);
        if (k == ":parameters") {
            if (has_params) fail(ErrorKind::syntax, "duplicate :parameters", key);
            expect_list(value, ":parameters");
            action.params = parse_typed_list(value.children, 0, true, "parameters of '" + action.name + "'");
            has_params = true;
        } else if (k == ":precondition") {
            if (pre_node != nullptr) fail(ErrorKind::syntax, "duplicate :precondition", key);
            pre_node = &value;
        } else if (k == ":effect") {
            if (has_effect) fail(ErrorKind::syntax, "duplicate :effect", key);
            eff_node = &value;
            has_effect = true;
        } else if (k == ":duration" || k == ":condition" || k == ":vars" || k == ":observe") {
            fail(ErrorKind::unsupported, "unsupported PDDL feature '" + key.text + "'", key);
        } else {
            fail(ErrorKind::syntax, "expected :parameters, :precondition or :effect, got '" + key.text + "'", key);
        }
    }
    if (!has_params) {
        fail(ErrorKind::syntax, "action '" + action.name + "': missing required section :parameters", section);
    }
    if (!has_effect) {
        fail(ErrorKind::syntax, "action '" + action.name + "': missing required section :effect", section);
    }
    check_params(action.params, domain, section, "action '" + action.name + "'");
    if (pre_node != nullptr) {
        action.precondition = parse_conjunction(*pre_node, "precondition of '" + action.name + "'");
        for (const auto& l : action.precondition) check_schema_literal(l, action, domain, *pre_node);
    }
    action.effect = parse_conjunction(*eff_node, "effect of '" + action.name + "'");
    for (const auto& l : action.effect) check_schema_literal(l, action, domain, *eff_node);
    for (const auto& l : action.effect) {
        Literal negated{!l.positive, l.atom};
        if (std::find(action.effect.begin(), action.effect.end(), negated) != action.effect.end()) {
            fail(ErrorKind::syntax,
                 "effect of '" + action.name + "' both adds and deletes " + to_string(l.atom), *eff_node);
        }
    }
    if (domain.find_action(action.name) != nullptr) {
        fail(ErrorKind::duplicate, "duplicate action '" + action.name + "'", section);
    }
    domain.actions.push_back(std::move(action));
}

// Checks `(define (<kind> NAME) ...)` and returns NAME.
std::string parse_header(const Node& root, std::string_view kind) {
    if (!root.is_list || root.children.empty() || !is_keyword(root.children.front(), "define")) {
        fail(ErrorKind::syntax, "expected '(define'", root);
    }
    if (root.children.size() < 2) fail(ErrorKind::syntax, "expected '(" + std::string(kind) + " NAME)'", root);
    const Node& header = root.children[1];
    if (!header.is_list || header.children.size() != 2 || !is_keyword(header.children[0], kind)) {
        fail(ErrorKind::syntax, "expected '(" + std::string(kind) + " NAME)'", header);
    }
    return expect_identifier(header.children[1], std::string(kind) + " name");
}

std::string section_keyword(const Node& section) {
    if (!section.is_list || section.children.empty() || section.children.front().is_list) {
        fail(ErrorKind::syntax, "expected a section such as '(:predicates'", section);
    }
    return lower(section.children.front().text);
}

}  // namespace

Domain parse_domain(std::string_view text) {
    Node root = Reader(text).read_document();
    Domain domain;
    domain.name = parse_header(root, "domain");

    const Node* types = nullptr;
    const Node* predicates = nullptr;
    std::vector<const Node*> actions;
    for (std::size_t i = 2; i < root.children.size(); ++i) {
        const Node& section = root.children[i];
        std::string key = section_keyword(section);
        if (key == ":requirements") continue;
        if (key == ":types") {
            if (types != nullptr) fail(ErrorKind::syntax, "duplicate :types section", section);
            types = &section;
        } else if (key == ":predicates") {
            if (predicates != nullptr) fail(ErrorKind::syntax, "duplicate :predicates section", section);
            predicates = &section;
        } else if (key == ":action") {
            actions.push_back(&section);
        } else if (kUnsupportedDomainSections.count(key)) {
            fail(ErrorKind::unsupported, "unsupported PDDL feature '" + section.children.front().text + "'",
                 section);
        } else {
            fail(ErrorKind::unsupported, "unsupported or unknown section '" + section.children.front().text + "'",
                 section);
        }
    }
    if (types != nullptr) parse_types_section(*types, domain);
    if (predicates != nullptr) parse_predicates_section(*predicates, domain);
    for (const Node* action : actions) parse_action(*action, domain);
    return domain;
}

ProblemSpec parse_problem(std::string_view text, const Domain& domain, const ProblemOptions& options) {
    Node root = Reader(text).read_document();
    ProblemSpec problem;
    problem.name = parse_header(root, "problem");

    const Node* domain_ref = nullptr;
    const Node* objects = nullptr;
    const Node* init = nullptr;
    const Node* goal = nullptr;
    for (std::size_t i = 2; i < root.children.size(); ++i) {
        const Node& section = root.children[i];
        std::string key = section_keyword(section);
        auto once = [&](const Node*& slot) {
            if (slot != nullptr) fail(ErrorKind::syntax, "duplicate " + key + " section", section);
            slot = &section;
        };
        if (key == ":requirements") continue;
        if (key == ":domain") {
            once(domain_ref);
        } else if (key == ":objects") {
            once(objects);
        } else if (key == ":init") {
            once(init);
        } else if (key == ":goal") {
            once(goal);
        } else {
            fail(ErrorKind::unsupported, "unsupported or unknown section '" + section.children.front().text + "'",
                 section);
        }
    }
    if (domain_ref == nullptr) fail(ErrorKind::syntax, "missing required section :domain", root);
    if (goal == nullptr) fail(ErrorKind::syntax, "missing required section :goal", root);

    if (domain_ref->children.size() != 2) fail(ErrorKind::syntax, "expected '(:domain NAME)'", *domain_ref);
    problem.domain_name = expect_identifier(domain_ref->children[1], "domain name");
    if (problem.domain_name != domain.name) {
        std::string msg = "problem refers to domain '" + problem.domain_name + "' but domain is '" + domain.name + "'";
        if (options.strict_domain_name) fail(ErrorKind::domain_mismatch, msg, *domain_ref);
        if (options.warnings != nullptr) options.warnings->push_back(msg);
    }

    if (objects != nullptr) {
        problem.objects = parse_typed_list(objects->children, 1, false, ":objects");
        std::set<std::string> seen;
        for (const auto& o : problem.objects) {
            if (!seen.insert(o.name).second) fail(ErrorKind::duplicate, "duplicate object '" + o.name + "'", *objects);
            if (!domain.types.contains(o.type)) {
                fail(ErrorKind::unknown_type, "object '" + o.name + "' has unknown type '" + o.type + "'", *objects);
            }
        }
    }

    auto check = [&](const Literal& literal, const Node& at) {
        for (const auto& arg : literal.atom.args) {
            if (is_variable(arg)) fail(ErrorKind::syntax, "variable '" + arg + "' in a ground formula", at);
        }
        try {
            check_ground_literal(literal, domain, problem);
        } catch (const ParseError& e) {
            fail(e.kind(), e.detail(), at);  // attach the formula's position
        }
    };

    if (init != nullptr) {
        for (std::size_t i = 1; i < init->children.size(); ++i) {
            const Node& item = init->children[i];
            if (item.is_list && !item.children.empty() && is_keyword(item.children.front(), "not")) {
                fail(ErrorKind::unsupported, "negative literal in :init (closed-world initial state)", item);
            }
            Atom atom = parse_atom(item, ":init");
            check(Literal{true, atom}, item);
            problem.init.insert(std::move(atom));
        }
    }
    if (goal->children.size() != 2) fail(ErrorKind::syntax, "expected exactly one formula in :goal", *goal);
    problem.goal = parse_conjunction(goal->children[1], ":goal");
    for (const auto& literal : problem.goal) check(literal, goal->children[1]);
    return problem;
}

}  // namespace hynpc::pddl
