#include "nonterm/term.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_set>

namespace nonterm {

namespace {

std::uint64_t mix(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

} // namespace

TermPtr Term::leaf(int var) {
    auto t = std::shared_ptr<Term>(new Term());
    t->var_ = var;
    t->ground_ = (var == 0);
    t->hash_ = mix(0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(var));
    return t;
}

TermPtr Term::app(TermPtr fun, TermPtr arg) {
    auto t = std::shared_ptr<Term>(new Term());
    t->ldepth_ = fun->ldepth_ + 1;
    t->max_sub_ldepth_ = std::max({t->ldepth_, fun->max_sub_ldepth_, arg->max_sub_ldepth_});
    t->leaf_count_ = fun->leaf_count_ + arg->leaf_count_;
    t->ground_ = fun->ground_ && arg->ground_;
    t->hash_ = mix(fun->hash_ * 0x2545f4914f6cdd1dULL ^ (arg->hash_ + 0x9e3779b97f4a7c15ULL));
    t->left_ = std::move(fun);
    t->right_ = std::move(arg);
    return t;
}

bool equal_terms(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->hash() != b->hash()) return false;
    if (a->is_leaf() != b->is_leaf()) return false;
    if (a->is_leaf()) return a->variable_index() == b->variable_index();
    return equal_terms(a->fun(), b->fun()) && equal_terms(a->arg(), b->arg());
}

std::vector<int> free_variables(const TermPtr& t) {
    std::set<int> vars;
    std::vector<const Term*> stack = {t.get()};
    while (!stack.empty()) {
        const Term* cur = stack.back();
        stack.pop_back();
        if (cur->is_variable()) {
            vars.insert(cur->variable_index());
        } else if (cur->is_app()) {
            stack.push_back(cur->fun().get());
            stack.push_back(cur->arg().get());
        }
    }
    return std::vector<int>(vars.begin(), vars.end());
}

namespace {

struct Token {
    enum Kind { Ident, LParen, RParen, Arrow, End } kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(') {
            out.push_back({Token::LParen, "(", i});
            ++i;
        } else if (c == ')') {
            out.push_back({Token::RParen, ")", i});
            ++i;
        } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            out.push_back({Token::Arrow, "->", i});
            i += 2;
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'') {
            std::size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
                    text[i] == '\'')) {
                ++i;
            }
            out.push_back({Token::Ident, text.substr(start, i - start), start});
        } else {
            throw SyntaxError("unexpected character '" + std::string(1, c) + "' at offset " +
                              std::to_string(i));
        }
    }
    out.push_back({Token::End, "", text.size()});
    return out;
}

// expr := atom+            (left-associative application)
// atom := ident | '(' expr ')'
// leaf_of maps an identifier to a leaf term or throws.
template <typename LeafOf>
TermPtr parse_expr(const std::vector<Token>& toks, std::size_t& i, const LeafOf& leaf_of) {
    TermPtr acc;
    while (true) {
        const Token& tok = toks[i];
        TermPtr atom;
        if (tok.kind == Token::Ident) {
            atom = leaf_of(tok.text, tok.pos);
            ++i;
        } else if (tok.kind == Token::LParen) {
            ++i;
            atom = parse_expr(toks, i, leaf_of);
            if (toks[i].kind != Token::RParen)
                throw SyntaxError("expected ')' at offset " + std::to_string(toks[i].pos));
            ++i;
        } else {
            break;
        }
        acc = acc ? Term::app(acc, atom) : atom;
    }
    if (!acc) throw SyntaxError("expected a term at offset " + std::to_string(toks[i].pos));
    return acc;
}

void collect_pattern_subterms(const TermPtr& t, std::vector<TermPtr>& out) {
    for (const TermPtr& seen : out)
        if (equal_terms(seen, t)) return;
    out.push_back(t);
    if (t->is_app()) {
        collect_pattern_subterms(t->fun(), out);
        collect_pattern_subterms(t->arg(), out);
    }
}

} // namespace

CombinatorRule parse_rule(const std::string& text) {
    auto toks = tokenize(text);
    std::size_t i = 0;
    if (toks[i].kind != Token::Ident)
        throw SyntaxError("rule must start with a combinator name");
    CombinatorRule rule;
    rule.name = toks[i].text;
    ++i;

    std::vector<std::string> var_names;
    while (toks[i].kind == Token::Ident) {
        const std::string& v = toks[i].text;
        if (v == rule.name)
            throw InvalidRule("lhs variable shadows the combinator name: " + v);
        if (std::find(var_names.begin(), var_names.end(), v) != var_names.end())
            throw InvalidRule("lhs is not left-linear: variable " + v + " repeats");
        var_names.push_back(v);
        ++i;
    }
    if (var_names.empty())
        throw InvalidRule("rule needs at least one lhs variable");
    if (toks[i].kind != Token::Arrow)
        throw SyntaxError("expected '->' at offset " + std::to_string(toks[i].pos));
    ++i;

    rule.arity = static_cast<int>(var_names.size());
    TermPtr lhs = Term::leaf(0);
    for (int k = 1; k <= rule.arity; ++k) lhs = Term::app(lhs, Term::leaf(k));
    rule.lhs = lhs;

    std::vector<bool> used(var_names.size(), false);
    auto leaf_of = [&](const std::string& ident, std::size_t pos) -> TermPtr {
        auto it = std::find(var_names.begin(), var_names.end(), ident);
        if (it == var_names.end())
            throw InvalidRule("rhs uses unknown symbol '" + ident + "' at offset " +
                              std::to_string(pos));
        std::size_t k = static_cast<std::size_t>(it - var_names.begin());
        used[k] = true;
        return Term::leaf(static_cast<int>(k) + 1);
    };
    rule.rhs = parse_expr(toks, i, leaf_of);
    if (toks[i].kind != Token::End)
        throw SyntaxError("trailing input at offset " + std::to_string(toks[i].pos));
    for (std::size_t k = 0; k < used.size(); ++k)
        if (!used[k])
            throw InvalidRule("rule is erasing: variable " + var_names[k] +
                              " does not occur in the rhs");

    collect_pattern_subterms(rule.lhs, rule.pattern_subterms);
    collect_pattern_subterms(rule.rhs, rule.pattern_subterms);
    return rule;
}

TermPtr parse_term(const std::string& text, const CombinatorRule& rule) {
    auto toks = tokenize(text);
    std::size_t i = 0;
    auto leaf_of = [&](const std::string& ident, std::size_t pos) -> TermPtr {
        if (ident != rule.name)
            throw UnknownSymbol("unknown symbol '" + ident + "' at offset " +
                                std::to_string(pos) + " (ground terms may only use " +
                                rule.name + ")");
        return Term::leaf(0);
    };
    TermPtr t = parse_expr(toks, i, leaf_of);
    if (toks[i].kind != Token::End)
        throw SyntaxError("trailing input at offset " + std::to_string(toks[i].pos));
    return t;
}

namespace {

void print_rec(const TermPtr& t, const CombinatorRule& rule, std::string& out) {
    if (t->is_leaf()) {
        if (t->is_combinator_leaf())
            out += rule.name;
        else
            out += "x" + std::to_string(t->variable_index());
        return;
    }
    print_rec(t->fun(), rule, out);
    out += ' ';
    if (t->arg()->is_app()) {
        out += '(';
        print_rec(t->arg(), rule, out);
        out += ')';
    } else {
        print_rec(t->arg(), rule, out);
    }
}

} // namespace

std::string print_term(const TermPtr& t, const CombinatorRule& rule) {
    std::string out;
    print_rec(t, rule, out);
    return out;
}

int ldepth(const TermPtr& t) {
    if (!t->ground()) throw InvalidInput("ldepth requires a ground term");
    return t->ldepth();
}

bool is_redex(const TermPtr& t, const CombinatorRule& rule) {
    return t->ground() && t->ldepth() == rule.arity;
}

bool is_normal_form(const TermPtr& t, const CombinatorRule& rule) {
    if (!t->ground()) throw InvalidInput("is_normal_form requires a ground term");
    return t->max_subterm_ldepth() < rule.arity;
}

namespace {

// Arguments of a redex, outermost application last: t = ((Z a1) a2 ...) an.
void redex_arguments(const TermPtr& t, int arity, std::vector<TermPtr>& args) {
    args.assign(static_cast<std::size_t>(arity), nullptr);
    const Term* cur = t.get();
    for (int k = arity; k >= 1; --k) {
        args[static_cast<std::size_t>(k) - 1] = cur->arg();
        cur = cur->fun().get();
    }
}

TermPtr substitute(const TermPtr& t, const std::vector<TermPtr>& args) {
    if (t->is_variable()) return args[static_cast<std::size_t>(t->variable_index()) - 1];
    if (t->is_leaf()) return t;
    return Term::app(substitute(t->fun(), args), substitute(t->arg(), args));
}

// An innermost redex may not contain a reducible proper subterm.  Since the
// spine prefixes have left depth < arity, that reduces to: every argument
// is a normal form.
bool redex_is_innermost(const TermPtr& t, const CombinatorRule& rule) {
    const Term* cur = t.get();
    for (int k = 0; k < rule.arity; ++k) {
        if (!is_normal_form(cur->arg(), rule)) return false;
        cur = cur->fun().get();
    }
    return true;
}

template <typename Eligible>
void successors_rec(const TermPtr& t, const CombinatorRule& rule, const Eligible& eligible,
                    std::vector<TermPtr>& out,
                    const std::vector<std::pair<TermPtr, bool>>& spine_up);

// Rebuild the whole term after replacing the subterm the path points at.
TermPtr rebuild(TermPtr replacement, const std::vector<std::pair<TermPtr, bool>>& spine_up) {
    for (auto it = spine_up.rbegin(); it != spine_up.rend(); ++it) {
        const auto& [node, went_left] = *it;
        replacement = went_left ? Term::app(replacement, node->arg())
                                : Term::app(node->fun(), replacement);
    }
    return replacement;
}

template <typename Eligible>
void successors_rec(const TermPtr& t, const CombinatorRule& rule, const Eligible& eligible,
                    std::vector<TermPtr>& out,
                    std::vector<std::pair<TermPtr, bool>>& spine_up) {
    if (t->ldepth() == rule.arity && eligible(t)) {
        std::vector<TermPtr> args;
        redex_arguments(t, rule.arity, args);
        out.push_back(rebuild(substitute(rule.rhs, args), spine_up));
    }
    if (!t->is_app()) return;
    spine_up.emplace_back(t, true);
    successors_rec(t->fun(), rule, eligible, out, spine_up);
    spine_up.back().second = false;
    successors_rec(t->arg(), rule, eligible, out, spine_up);
    spine_up.pop_back();
}

template <typename Eligible>
std::vector<TermPtr> successors(const TermPtr& t, const CombinatorRule& rule,
                                const Eligible& eligible) {
    if (!t->ground()) throw InvalidInput("rewriting requires a ground term");
    std::vector<TermPtr> out;
    std::vector<std::pair<TermPtr, bool>> spine_up;
    successors_rec(t, rule, eligible, out, spine_up);
    return out;
}

} // namespace

std::vector<TermPtr> rewrite_successors(const TermPtr& t, const CombinatorRule& rule) {
    return successors(t, rule, [](const TermPtr&) { return true; });
}

std::vector<TermPtr> innermost_successors(const TermPtr& t, const CombinatorRule& rule) {
    return successors(t, rule,
                      [&](const TermPtr& redex) { return redex_is_innermost(redex, rule); });
}

const std::vector<CombinatorRule>& builtin_rules() {
    static const std::vector<CombinatorRule> rules = [] {
        std::vector<CombinatorRule> out;
        for (const char* text : {
                 "P x y z -> z (x y z)",
                 "P3 x y z -> y (x z y)",
                 "D1 x y z w -> x z (y w) (x z)",
                 "D2 x y z w -> x w (y z) (x w)",
                 "Phi x y z w -> x (y w) (z w)",
                 "Phi2 x y z w1 w2 -> x (y w1 w2) (z w1 w2)",
                 "S1 x y z w -> x y w (z w)",
                 "S2 x y z w -> x z w (y z w)",
                 "S3 x y z w v -> x y (z v) (w v)",
                 "S4 x y z w v -> z (x w v) (y w v)",
             }) {
            out.push_back(parse_rule(text));
        }
        return out;
    }();
    return rules;
}

const CombinatorRule* find_builtin_rule(const std::string& name) {
    for (const CombinatorRule& r : builtin_rules())
        if (r.name == name) return &r;
    return nullptr;
}

CombinatorRule resolve_rule(const std::string& name_or_rule) {
    if (name_or_rule.find("->") == std::string::npos) {
        std::string trimmed = name_or_rule;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        trimmed.erase(trimmed.find_last_not_of(" \t") + 1);
        if (const CombinatorRule* r = find_builtin_rule(trimmed)) return *r;
        throw UnknownSymbol("'" + trimmed + "' is not a registered combinator " +
                            "(pass a full rule like \"P x y z -> z (x y z)\")");
    }
    return parse_rule(name_or_rule);
}

} // namespace nonterm
