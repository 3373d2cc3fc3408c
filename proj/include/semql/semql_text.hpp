#pragma once

// Textual form of SemQL trees: an s-expression per tree, one canonical
// spelling per tree. parse_semql(print_semql(t)) == t for any tree, and
// printing a parsed input yields its canonical spelling.
//
//   (Z (R (Select (A none (C name) (T friend)))))
//   (Z union (R ...) (R ...))
//   (Filter > (A count (C *) (T performance)) 3)
//   (Filter in (A none (C id) (T show)) (R ...))
//   (Superlative desc 1 (A none (C year) (T orchestra)))

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semql/errors.hpp"
#include "semql/semql_tree.hpp"

namespace semql {

namespace detail {

// --- printing ---------------------------------------------------------------

inline std::string atom_or_quoted(const std::string& text) {
    bool needs_quotes = text.empty();
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
            c == '"')
            needs_quotes = true;
    }
    if (!needs_quotes) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void print_a(const ANode& a, std::string& out) {
    out += "(A";
    bool bare = a.agg == AggOp::none && !a.distinct && a.column.column.empty() &&
                a.table.table.empty();
    if (!bare) {
        out += " ";
        out += agg_name(a.agg);
        if (a.distinct) out += " distinct";
        if (!a.column.column.empty()) out += " (C " + atom_or_quoted(a.column.column) + ")";
        if (!a.table.table.empty()) out += " (T " + atom_or_quoted(a.table.table) + ")";
    }
    out += ")";
}

inline void print_r(const RNode& r, std::string& out);

inline void print_filter(const FilterNode& f, std::string& out) {
    out += "(Filter ";
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        out += "and ";
        print_filter(*conj->left, out);
        out += " ";
        print_filter(*conj->right, out);
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        out += "or ";
        print_filter(*disj->left, out);
        out += " ";
        print_filter(*disj->right, out);
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        out += cmp_name(cmp->op);
        out += " ";
        print_a(cmp->operand, out);
        for (const std::string& lit : cmp->literals) out += " " + atom_or_quoted(lit);
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        out += cmp_name(sub->op);
        out += " ";
        print_a(sub->operand, out);
        out += " ";
        print_r(*sub->subquery, out);
    }
    out += ")";
}

inline void print_r(const RNode& r, std::string& out) {
    out += "(R (Select";
    for (const ANode& a : r.select.items) {
        out += " ";
        print_a(a, out);
    }
    out += ")";
    if (r.filter.has_value()) {
        out += " ";
        print_filter(*r.filter, out);
    }
    if (r.order.has_value()) {
        out += " (Order ";
        out += dir_name(r.order->direction);
        out += " ";
        print_a(r.order->target, out);
        out += ")";
    }
    if (r.superlative.has_value()) {
        out += " (Superlative ";
        out += dir_name(r.superlative->direction);
        out += " " + std::to_string(r.superlative->limit) + " ";
        print_a(r.superlative->target, out);
        out += ")";
    }
    out += ")";
}

// --- lexing -----------------------------------------------------------------

struct SexprToken {
    enum class Kind { lparen, rparen, atom, eof } kind;
    std::string text;
    std::size_t offset;
};

inline std::vector<SexprToken> lex_sexpr(std::string_view input) {
    std::vector<SexprToken> tokens;
    std::size_t i = 0;
    while (i < input.size()) {
        char c = input[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(') {
            tokens.push_back({SexprToken::Kind::lparen, "(", i});
            ++i;
        } else if (c == ')') {
            tokens.push_back({SexprToken::Kind::rparen, ")", i});
            ++i;
        } else if (c == '"') {
            std::size_t start = i;
            ++i;
            std::string text;
            while (true) {
                if (i >= input.size())
                    throw SemQLSyntaxError("unterminated quoted atom", start);
                char d = input[i];
                if (d == '"') {
                    ++i;
                    break;
                }
                if (d == '\\') {
                    ++i;
                    if (i >= input.size())
                        throw SemQLSyntaxError("unterminated escape", start);
                    d = input[i];
                }
                text.push_back(d);
                ++i;
            }
            tokens.push_back({SexprToken::Kind::atom, std::move(text), start});
        } else {
            std::size_t start = i;
            std::string text;
            while (i < input.size() && !std::isspace(static_cast<unsigned char>(input[i])) &&
                   input[i] != '(' && input[i] != ')' && input[i] != '"') {
                text.push_back(input[i]);
                ++i;
            }
            tokens.push_back({SexprToken::Kind::atom, std::move(text), start});
        }
    }
    tokens.push_back({SexprToken::Kind::eof, "", input.size()});
    return tokens;
}

// --- parsing ----------------------------------------------------------------

class SexprParser {
public:
    explicit SexprParser(std::string_view input) : tokens_(lex_sexpr(input)) {}

    SemQLTree parse_tree() {
        expect_lparen();
        expect_atom("Z");
        SemQLTree tree;
        if (peek_is_atom()) {
            std::string kw = take_atom();
            if (kw == "intersect") tree.root.kind = ZKind::intersect;
            else if (kw == "union") tree.root.kind = ZKind::union_;
            else if (kw == "except") tree.root.kind = ZKind::except_;
            else fail("expected set operation keyword, got '" + kw + "'");
            tree.root.left = parse_r();
            tree.root.right = parse_r();
        } else {
            tree.root.kind = ZKind::single;
            tree.root.left = parse_r();
        }
        expect_rparen();
        if (tokens_[pos_].kind != SexprToken::Kind::eof)
            fail("trailing input after tree");
        return tree;
    }

private:
    std::vector<SexprToken> tokens_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw SemQLSyntaxError(message, tokens_[pos_].offset);
    }

    bool peek_is_atom() const { return tokens_[pos_].kind == SexprToken::Kind::atom; }
    bool peek_is_lparen() const { return tokens_[pos_].kind == SexprToken::Kind::lparen; }
    bool peek_is_rparen() const { return tokens_[pos_].kind == SexprToken::Kind::rparen; }

    /// Head atom of the list starting at pos_ (which must be a lparen).
    std::string peek_head() const {
        if (tokens_[pos_].kind == SexprToken::Kind::lparen &&
            tokens_[pos_ + 1].kind == SexprToken::Kind::atom)
            return tokens_[pos_ + 1].text;
        return "";
    }

    void expect_lparen() {
        if (!peek_is_lparen()) fail("expected '('");
        ++pos_;
    }

    void expect_rparen() {
        if (!peek_is_rparen()) fail("expected ')'");
        ++pos_;
    }

    std::string take_atom() {
        if (!peek_is_atom()) fail("expected atom");
        return tokens_[pos_++].text;
    }

    void expect_atom(const std::string& text) {
        if (!peek_is_atom() || tokens_[pos_].text != text)
            fail("expected '" + text + "'");
        ++pos_;
    }

    RNode parse_r() {
        expect_lparen();
        expect_atom("R");
        RNode r;
        r.select = parse_select();
        while (peek_is_lparen()) {
            std::string head = peek_head();
            if (head == "Filter") {
                if (r.filter.has_value()) fail("duplicate Filter in R");
                if (r.order.has_value() || r.superlative.has_value())
                    fail("Filter must precede Order and Superlative");
                r.filter = parse_filter();
            } else if (head == "Order") {
                if (r.order.has_value() || r.superlative.has_value())
                    fail("R carries at most one Order or Superlative");
                r.order = parse_order();
            } else if (head == "Superlative") {
                if (r.order.has_value() || r.superlative.has_value())
                    fail("R carries at most one Order or Superlative");
                r.superlative = parse_superlative();
            } else {
                fail("unexpected list '" + head + "' in R");
            }
        }
        expect_rparen();
        return r;
    }

    SelectNode parse_select() {
        expect_lparen();
        expect_atom("Select");
        SelectNode select;
        while (peek_is_lparen()) select.items.push_back(parse_a());
        expect_rparen();
        if (select.items.empty()) fail("Select carries at least one A");
        return select;
    }

    ANode parse_a() {
        expect_lparen();
        expect_atom("A");
        ANode a;
        if (peek_is_atom()) {
            std::string agg = take_atom();
            bool found = false;
            for (AggOp op : {AggOp::none, AggOp::max, AggOp::min, AggOp::count, AggOp::sum,
                             AggOp::avg}) {
                if (agg == agg_name(op)) {
                    a.agg = op;
                    found = true;
                    break;
                }
            }
            if (!found) fail("unknown aggregate '" + agg + "'");
        }
        if (peek_is_atom() && tokens_[pos_].text == "distinct") {
            a.distinct = true;
            ++pos_;
        }
        if (peek_is_lparen() && peek_head() == "C") {
            expect_lparen();
            expect_atom("C");
            a.column.column = take_atom();
            expect_rparen();
        }
        if (peek_is_lparen() && peek_head() == "T") {
            expect_lparen();
            expect_atom("T");
            a.table.table = take_atom();
            expect_rparen();
        }
        expect_rparen();
        return a;
    }

    std::optional<CmpOp> cmp_from_name(const std::string& name) const {
        for (CmpOp op : {CmpOp::eq, CmpOp::ne, CmpOp::lt, CmpOp::gt, CmpOp::le, CmpOp::ge,
                         CmpOp::between, CmpOp::like, CmpOp::not_like, CmpOp::in,
                         CmpOp::not_in})
            if (name == cmp_name(op)) return op;
        return std::nullopt;
    }

    FilterNode parse_filter() {
        expect_lparen();
        expect_atom("Filter");
        std::string head = take_atom();
        FilterNode f;
        if (head == "and" || head == "or") {
            box<FilterNode> left(parse_filter());
            box<FilterNode> right(parse_filter());
            if (head == "and") f.node = AndFilter{std::move(left), std::move(right)};
            else f.node = OrFilter{std::move(left), std::move(right)};
        } else if (auto op = cmp_from_name(head)) {
            ANode operand = parse_a();
            if (peek_is_lparen()) {
                if (peek_head() != "R") fail("expected subquery R");
                f.node = SubqueryFilter{*op, std::move(operand), box<RNode>(parse_r())};
            } else {
                CmpFilter cmp{*op, std::move(operand), {}};
                while (peek_is_atom()) {
                    if (cmp.literals.size() == 2) fail("too many literals in Filter");
                    cmp.literals.push_back(take_atom());
                }
                f.node = std::move(cmp);
            }
        } else {
            fail("unknown filter operator '" + head + "'");
        }
        expect_rparen();
        return f;
    }

    OrderNode parse_order() {
        expect_lparen();
        expect_atom("Order");
        OrderNode order;
        order.direction = parse_direction();
        order.target = parse_a();
        expect_rparen();
        return order;
    }

    SuperlativeNode parse_superlative() {
        expect_lparen();
        expect_atom("Superlative");
        SuperlativeNode sup;
        sup.direction = parse_direction();
        if (peek_is_atom()) {
            std::string text = take_atom();
            try {
                std::size_t used = 0;
                sup.limit = std::stol(text, &used);
                if (used != text.size()) throw std::invalid_argument(text);
            } catch (const std::exception&) {
                fail("expected integer limit, got '" + text + "'");
            }
        }
        sup.target = parse_a();
        expect_rparen();
        return sup;
    }

    OrderDir parse_direction() {
        std::string text = take_atom();
        if (text == "asc") return OrderDir::asc;
        if (text == "desc") return OrderDir::desc;
        fail("expected 'asc' or 'desc', got '" + text + "'");
    }
};

}  // namespace detail

/// Prints the canonical s-expression spelling of a tree.
inline std::string print_semql(const SemQLTree& tree) {
    std::string out = "(Z";
    if (tree.root.kind != ZKind::single) {
        out += " ";
        out += zkind_name(tree.root.kind);
    }
    out += " ";
    detail::print_r(tree.root.left, out);
    if (tree.root.right.has_value()) {
        out += " ";
        detail::print_r(*tree.root.right, out);
    }
    out += ")";
    return out;
}

/// Parses an s-expression into a tree; throws SemQLSyntaxError with the
/// byte offset of the first problem.
inline SemQLTree parse_semql(std::string_view input) {
    return detail::SexprParser(input).parse_tree();
}

}  // namespace semql
