#pragma once

// Recursive-descent parser for the supported SQL subset, followed by name
// resolution against a schema. The subset is exactly what the tree form can
// express: single-level set operations, inner joins on foreign keys, one
// ORDER BY item, subqueries as comparison operands. Everything else is
// rejected with UnsupportedSqlError rather than silently misread.

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semql/errors.hpp"
#include "semql/schema.hpp"
#include "semql/sql.hpp"
#include "semql/util.hpp"

namespace semql {

namespace detail {

struct SqlToken {
    enum class Kind { ident, number, string, symbol, eof } kind;
    std::string text;
    std::size_t offset;

    bool is_keyword(std::string_view kw) const {
        return kind == Kind::ident && iequals(text, kw);
    }
    bool is_symbol(std::string_view sym) const {
        return kind == Kind::symbol && text == sym;
    }
};

inline std::vector<SqlToken> lex_sql(std::string_view input) {
    std::vector<SqlToken> tokens;
    std::size_t i = 0;
    auto push = [&tokens](SqlToken::Kind kind, std::string text, std::size_t offset) {
        tokens.push_back(SqlToken{kind, std::move(text), offset});
    };
    while (i < input.size()) {
        char c = input[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            std::string text;
            while (i < input.size() && (std::isalnum(static_cast<unsigned char>(input[i])) ||
                                        input[i] == '_')) {
                text.push_back(input[i]);
                ++i;
            }
            push(SqlToken::Kind::ident, std::move(text), start);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '-' && i + 1 < input.size() &&
                    std::isdigit(static_cast<unsigned char>(input[i + 1])))) {
            std::size_t start = i;
            std::string text;
            if (c == '-') {
                text.push_back(c);
                ++i;
            }
            bool seen_dot = false;
            while (i < input.size() && (std::isdigit(static_cast<unsigned char>(input[i])) ||
                                        (input[i] == '.' && !seen_dot))) {
                if (input[i] == '.') seen_dot = true;
                text.push_back(input[i]);
                ++i;
            }
            push(SqlToken::Kind::number, std::move(text), start);
        } else if (c == '\'' || c == '"') {
            char quote = c;
            std::size_t start = i;
            std::string text;
            text.push_back(quote);
            ++i;
            while (true) {
                if (i >= input.size())
                    throw SqlSyntaxError("unterminated string literal", start);
                text.push_back(input[i]);
                if (input[i] == quote) {
                    ++i;
                    break;
                }
                ++i;
            }
            push(SqlToken::Kind::string, std::move(text), start);
        } else {
            std::size_t start = i;
            auto two = input.substr(i, 2);
            if (two == "!=" || two == "<>" || two == "<=" || two == ">=") {
                push(SqlToken::Kind::symbol, std::string(two == "<>" ? "!=" : two), start);
                i += 2;
            } else if (std::string_view("(),.*=<>;").find(c) != std::string_view::npos) {
                push(SqlToken::Kind::symbol, std::string(1, c), start);
                ++i;
            } else {
                throw SqlSyntaxError(std::string("unexpected character '") + c + "'", start);
            }
        }
    }
    push(SqlToken::Kind::eof, "", input.size());
    return tokens;
}

class SqlParser {
public:
    explicit SqlParser(std::string_view input) : tokens_(lex_sql(input)) {}

    SqlQuery parse() {
        SqlQuery query = parse_operand(true);
        if (peek().is_symbol(";")) ++pos_;
        if (peek().kind != SqlToken::Kind::eof) fail("trailing input after query");
        return query;
    }

private:
    std::vector<SqlToken> tokens_;
    std::size_t pos_ = 0;

    const SqlToken& peek(std::size_t ahead = 0) const {
        std::size_t at = pos_ + ahead;
        return at < tokens_.size() ? tokens_[at] : tokens_.back();
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw SqlSyntaxError(message, peek().offset);
    }

    bool take_keyword(std::string_view kw) {
        if (!peek().is_keyword(kw)) return false;
        ++pos_;
        return true;
    }

    void expect_keyword(std::string_view kw) {
        if (!take_keyword(kw)) fail("expected " + std::string(kw));
    }

    bool take_symbol(std::string_view sym) {
        if (!peek().is_symbol(sym)) return false;
        ++pos_;
        return true;
    }

    void expect_symbol(std::string_view sym) {
        if (!take_symbol(sym)) fail("expected '" + std::string(sym) + "'");
    }

    std::string take_ident() {
        if (peek().kind != SqlToken::Kind::ident) fail("expected identifier");
        return tokens_[pos_++].text;
    }

    static bool is_reserved(const SqlToken& token) {
        static const char* words[] = {"select", "from",  "where",  "group",    "having",
                                      "order",  "limit", "join",   "on",       "and",
                                      "or",     "not",   "in",     "like",     "between",
                                      "union",  "except", "intersect", "distinct", "as",
                                      "by",     "asc",   "desc",   "inner"};
        for (const char* w : words)
            if (token.is_keyword(w)) return true;
        return false;
    }

    /// A set-operation operand: a core query, optionally parenthesized.
    SqlQuery parse_operand(bool allow_set_op) {
        SqlQuery query;
        if (peek().is_symbol("(") && peek(1).is_keyword("select")) {
            ++pos_;
            query = parse_core();
            expect_symbol(")");
        } else {
            query = parse_core();
        }
        if (peek().is_keyword("union") || peek().is_keyword("except") ||
            peek().is_keyword("intersect")) {
            if (!allow_set_op)
                throw UnsupportedSqlError("chained or nested set operations");
            SqlSetOp kind = peek().is_keyword("union")     ? SqlSetOp::union_
                            : peek().is_keyword("except")  ? SqlSetOp::except_
                                                           : SqlSetOp::intersect;
            ++pos_;
            if (take_keyword("all"))
                throw UnsupportedSqlError("set operation with ALL");
            SqlQuery right = parse_operand(false);
            query.set_op = SqlSetOpClause{kind, box<SqlQuery>(std::move(right))};
        }
        return query;
    }

    SqlQuery parse_core() {
        SqlQuery query;
        expect_keyword("select");
        bool select_distinct = take_keyword("distinct");
        query.select.push_back(parse_expr());
        while (take_symbol(",")) query.select.push_back(parse_expr());
        if (select_distinct) {
            bool any_bare = false;
            for (SqlExpr& item : query.select)
                if (item.agg == AggOp::none) {
                    item.distinct = true;
                    any_bare = true;
                }
            if (!any_bare)
                throw UnsupportedSqlError("DISTINCT on an aggregate-only select list");
        }

        expect_keyword("from");
        query.from.push_back(SqlJoin{parse_table_name(), std::nullopt});
        while (peek().is_keyword("join") || peek().is_keyword("inner")) {
            take_keyword("inner");
            expect_keyword("join");
            std::string table = parse_table_name();
            expect_keyword("on");
            ColumnRef left = parse_colref();
            expect_symbol("=");
            ColumnRef right = parse_colref();
            query.from.push_back(SqlJoin{std::move(table), std::make_pair(left, right)});
        }
        for (const char* kw : {"left", "right", "full", "cross", "natural"})
            if (peek().is_keyword(kw))
                throw UnsupportedSqlError(std::string(to_lower(kw)) + " join");

        if (take_keyword("where")) query.where = parse_condition();

        if (take_keyword("group")) {
            expect_keyword("by");
            query.group_by.push_back(parse_colref());
            while (take_symbol(",")) query.group_by.push_back(parse_colref());
        }

        if (take_keyword("having")) {
            if (query.group_by.empty())
                throw SqlSyntaxError("HAVING requires GROUP BY", peek().offset);
            query.having = parse_condition();
        }

        if (take_keyword("order")) {
            expect_keyword("by");
            SqlOrderBy order;
            order.target = parse_expr();
            if (take_keyword("desc")) order.direction = OrderDir::desc;
            else if (take_keyword("asc")) order.direction = OrderDir::asc;
            if (peek().is_symbol(","))
                throw UnsupportedSqlError("multiple ORDER BY items");
            query.order_by = order;
        }

        if (take_keyword("limit")) {
            if (peek().kind != SqlToken::Kind::number) fail("expected LIMIT count");
            long value = 0;
            try {
                value = std::stol(tokens_[pos_].text);
            } catch (const std::exception&) {
                fail("expected LIMIT count");
            }
            if (value < 1)
                throw SqlSyntaxError("LIMIT must be a positive integer", peek().offset);
            ++pos_;
            query.limit = value;
        }

        return query;
    }

    std::string parse_table_name() {
        std::string name = take_ident();
        if (take_keyword("as"))
            throw UnsupportedSqlError("table alias on '" + name + "'");
        if (peek().kind == SqlToken::Kind::ident && !is_reserved(peek()))
            throw UnsupportedSqlError("table alias on '" + name + "'");
        return name;
    }

    SqlExpr parse_expr() {
        SqlExpr expr;
        if (take_symbol("*")) {
            expr.star = true;
            return expr;
        }
        if (peek().kind != SqlToken::Kind::ident) fail("expected expression");
        // Aggregate call or unknown function?
        if (peek(1).is_symbol("(")) {
            std::string name = to_lower(peek().text);
            AggOp agg;
            if (name == "max") agg = AggOp::max;
            else if (name == "min") agg = AggOp::min;
            else if (name == "count") agg = AggOp::count;
            else if (name == "sum") agg = AggOp::sum;
            else if (name == "avg") agg = AggOp::avg;
            else throw UnsupportedSqlError("unsupported function '" + peek().text + "'");
            pos_ += 2;
            expr.agg = agg;
            expr.distinct = take_keyword("distinct");
            if (take_symbol("*")) expr.star = true;
            else expr.column = parse_colref();
            expect_symbol(")");
            return expr;
        }
        expr.column = parse_colref();
        return expr;
    }

    ColumnRef parse_colref() {
        if (peek().kind != SqlToken::Kind::ident || is_reserved(peek()))
            fail("expected column reference");
        std::string first = take_ident();
        if (take_symbol(".")) {
            std::string column = take_ident();
            return ColumnRef{first, column};
        }
        return ColumnRef{"", first};
    }

    SqlCondition parse_condition() {
        SqlCondition left = parse_and_chain();
        while (take_keyword("or")) {
            SqlCondition right = parse_and_chain();
            SqlCondition parent;
            parent.node = SqlOr{box<SqlCondition>(std::move(left)),
                                box<SqlCondition>(std::move(right))};
            left = std::move(parent);
        }
        return left;
    }

    SqlCondition parse_and_chain() {
        SqlCondition left = parse_condition_unit();
        while (take_keyword("and")) {
            SqlCondition right = parse_condition_unit();
            SqlCondition parent;
            parent.node = SqlAnd{box<SqlCondition>(std::move(left)),
                                 box<SqlCondition>(std::move(right))};
            left = std::move(parent);
        }
        return left;
    }

    SqlCondition parse_condition_unit() {
        if (peek().is_keyword("not"))
            throw UnsupportedSqlError("bare NOT condition");
        if (peek().is_symbol("(") && !peek(1).is_keyword("select")) {
            ++pos_;
            SqlCondition cond = parse_condition();
            expect_symbol(")");
            return cond;
        }
        return parse_leaf();
    }

    SqlCondition parse_leaf() {
        SqlLeaf leaf;
        leaf.lhs = parse_expr();
        if (take_keyword("not")) {
            if (take_keyword("in")) leaf.op = CmpOp::not_in;
            else if (take_keyword("like")) leaf.op = CmpOp::not_like;
            else fail("expected IN or LIKE after NOT");
        } else if (take_keyword("in")) {
            leaf.op = CmpOp::in;
        } else if (take_keyword("like")) {
            leaf.op = CmpOp::like;
        } else if (take_keyword("between")) {
            leaf.op = CmpOp::between;
        } else if (peek().kind == SqlToken::Kind::symbol) {
            std::string sym = peek().text;
            if (sym == "=") leaf.op = CmpOp::eq;
            else if (sym == "!=") leaf.op = CmpOp::ne;
            else if (sym == "<") leaf.op = CmpOp::lt;
            else if (sym == ">") leaf.op = CmpOp::gt;
            else if (sym == "<=") leaf.op = CmpOp::le;
            else if (sym == ">=") leaf.op = CmpOp::ge;
            else fail("expected comparison operator");
            ++pos_;
        } else {
            fail("expected comparison operator");
        }

        if (leaf.op == CmpOp::between) {
            leaf.literals.push_back(parse_literal());
            expect_keyword("and");
            leaf.literals.push_back(parse_literal());
        } else if (leaf.op == CmpOp::in || leaf.op == CmpOp::not_in) {
            expect_symbol("(");
            if (peek().is_keyword("select")) {
                leaf.subquery = box<SqlQuery>(parse_operand(false));
            } else {
                leaf.literals.push_back(parse_literal());
                if (peek().is_symbol(","))
                    throw UnsupportedSqlError("IN list with multiple literals");
            }
            expect_symbol(")");
        } else if (peek().is_symbol("(") && peek(1).is_keyword("select")) {
            ++pos_;
            leaf.subquery = box<SqlQuery>(parse_operand(false));
            expect_symbol(")");
        } else {
            leaf.literals.push_back(parse_literal());
        }

        SqlCondition cond;
        cond.node = std::move(leaf);
        return cond;
    }

    std::string parse_literal() {
        if (peek().kind == SqlToken::Kind::number || peek().kind == SqlToken::Kind::string)
            return tokens_[pos_++].text;
        fail("expected literal value");
    }
};

/// Resolves table and column spellings against the schema, scope by scope.
class SqlResolver {
public:
    explicit SqlResolver(const Schema& schema) : schema_(schema) {}

    void resolve(SqlQuery& query) const {
        resolve_scope(query);
        if (query.set_op.has_value()) resolve_scope(*query.set_op->right);
    }

private:
    const Schema& schema_;

    void resolve_scope(SqlQuery& query) const {
        std::vector<const Table*> scope;
        for (SqlJoin& join : query.from) {
            const Table* table = schema_.find_table(join.table);
            if (table == nullptr)
                throw ResolutionError("unknown table '" + join.table + "'");
            for (const Table* seen : scope)
                if (seen == table)
                    throw UnsupportedSqlError("self join on table '" + table->name + "'");
            join.table = table->name;
            scope.push_back(table);
        }
        for (SqlJoin& join : query.from)
            if (join.on.has_value()) {
                resolve_ref(join.on->first, scope);
                resolve_ref(join.on->second, scope);
            }
        for (SqlExpr& item : query.select) resolve_expr(item, scope);
        if (query.where.has_value()) resolve_condition(*query.where, scope, false);
        for (ColumnRef& ref : query.group_by) resolve_ref(ref, scope);
        if (query.having.has_value()) resolve_condition(*query.having, scope, true);
        if (query.order_by.has_value()) resolve_expr(query.order_by->target, scope);
    }

    void resolve_condition(SqlCondition& cond, const std::vector<const Table*>& scope,
                           bool aggregates_allowed) const {
        if (auto* conj = std::get_if<SqlAnd>(&cond.node)) {
            resolve_condition(*conj->left, scope, aggregates_allowed);
            resolve_condition(*conj->right, scope, aggregates_allowed);
        } else if (auto* disj = std::get_if<SqlOr>(&cond.node)) {
            resolve_condition(*disj->left, scope, aggregates_allowed);
            resolve_condition(*disj->right, scope, aggregates_allowed);
        } else if (auto* leaf = std::get_if<SqlLeaf>(&cond.node)) {
            if (!aggregates_allowed && leaf->lhs.agg != AggOp::none)
                throw UnsupportedSqlError("aggregate function in WHERE clause");
            resolve_expr(leaf->lhs, scope);
            if (leaf->subquery.has_value()) resolve_scope(**leaf->subquery);
        }
    }

    void resolve_expr(SqlExpr& expr, const std::vector<const Table*>& scope) const {
        if (expr.star) return;
        resolve_ref(expr.column, scope);
    }

    void resolve_ref(ColumnRef& ref, const std::vector<const Table*>& scope) const {
        if (!ref.table.empty()) {
            for (const Table* table : scope) {
                if (!iequals(table->name, ref.table)) continue;
                const Column* column = table->find_column(ref.column);
                if (column == nullptr)
                    throw ResolutionError("table '" + table->name + "' has no column '" +
                                          ref.column + "'");
                ref.table = table->name;
                ref.column = column->original_name;
                return;
            }
            throw ResolutionError("table '" + ref.table + "' is not in the FROM clause");
        }
        const Table* owner = nullptr;
        const Column* found = nullptr;
        for (const Table* table : scope) {
            const Column* column = table->find_column(ref.column);
            if (column == nullptr) continue;
            if (owner != nullptr)
                throw ResolutionError("ambiguous column '" + ref.column + "'");
            owner = table;
            found = column;
        }
        if (owner == nullptr)
            throw ResolutionError("unknown column '" + ref.column + "'");
        ref.table = owner->name;
        ref.column = found->original_name;
    }
};

}  // namespace detail

/// Parses SQL text and resolves every name against the schema. Qualified
/// spellings in the result use the schema's capitalization.
inline SqlQuery parse_sql(std::string_view text, const Schema& schema) {
    SqlQuery query = detail::SqlParser(text).parse();
    detail::SqlResolver(schema).resolve(query);
    return query;
}

}  // namespace semql
