#pragma once

// SQL abstract syntax for the supported subset, plus the canonical printer.
// The printer emits upper-case keywords, fully qualified column names, and
// parenthesized set-operation operands; parsing its output reproduces the
// same AST.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semql/schema.hpp"
#include "semql/semql_tree.hpp"
#include "semql/util.hpp"

namespace semql {

enum class SqlSetOp { union_, except_, intersect };

inline const char* set_op_name(SqlSetOp op) {
    switch (op) {
        case SqlSetOp::union_: return "UNION";
        case SqlSetOp::except_: return "EXCEPT";
        case SqlSetOp::intersect: return "INTERSECT";
    }
    return "UNION";
}

/// A possibly aggregated column expression: select item, condition operand,
/// or ordering target. star covers both bare '*' and agg(*).
struct SqlExpr {
    AggOp agg = AggOp::none;
    bool distinct = false;
    bool star = false;
    ColumnRef column;  // ignored when star

    friend bool operator==(const SqlExpr&, const SqlExpr&) = default;
};

/// One FROM entry; the first carries no join condition.
struct SqlJoin {
    std::string table;
    std::optional<std::pair<ColumnRef, ColumnRef>> on;

    friend bool operator==(const SqlJoin&, const SqlJoin&) = default;
};

struct SqlQuery;

/// Leaf condition: expr op rhs, where rhs is literals or a subquery.
/// Literal text keeps its source spelling (quotes included for strings).
struct SqlLeaf {
    CmpOp op = CmpOp::eq;
    SqlExpr lhs;
    std::vector<std::string> literals;
    std::optional<box<SqlQuery>> subquery;

    friend bool operator==(const SqlLeaf&, const SqlLeaf&) = default;
};

struct SqlCondition;

struct SqlAnd {
    box<SqlCondition> left;
    box<SqlCondition> right;

    friend bool operator==(const SqlAnd&, const SqlAnd&) = default;
};

struct SqlOr {
    box<SqlCondition> left;
    box<SqlCondition> right;

    friend bool operator==(const SqlOr&, const SqlOr&) = default;
};

struct SqlCondition {
    // Defaults to the leaf alternative for the same reason FilterNode does.
    std::variant<SqlAnd, SqlOr, SqlLeaf> node = SqlLeaf{};

    friend bool operator==(const SqlCondition&, const SqlCondition&) = default;
};

struct SqlOrderBy {
    OrderDir direction = OrderDir::asc;
    SqlExpr target;

    friend bool operator==(const SqlOrderBy&, const SqlOrderBy&) = default;
};

struct SqlSetOpClause {
    SqlSetOp kind = SqlSetOp::union_;
    box<SqlQuery> right;

    friend bool operator==(const SqlSetOpClause&, const SqlSetOpClause&) = default;
};

struct SqlQuery {
    std::vector<SqlExpr> select;
    std::vector<SqlJoin> from;
    std::optional<SqlCondition> where;
    std::vector<ColumnRef> group_by;
    std::optional<SqlCondition> having;
    std::optional<SqlOrderBy> order_by;
    std::optional<long> limit;
    std::optional<SqlSetOpClause> set_op;

    friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

namespace detail {

inline const char* agg_keyword(AggOp agg) {
    switch (agg) {
        case AggOp::none: return "";
        case AggOp::max: return "MAX";
        case AggOp::min: return "MIN";
        case AggOp::count: return "COUNT";
        case AggOp::sum: return "SUM";
        case AggOp::avg: return "AVG";
    }
    return "";
}

inline const char* cmp_keyword(CmpOp op) {
    switch (op) {
        case CmpOp::eq: return "=";
        case CmpOp::ne: return "!=";
        case CmpOp::lt: return "<";
        case CmpOp::gt: return ">";
        case CmpOp::le: return "<=";
        case CmpOp::ge: return ">=";
        case CmpOp::between: return "BETWEEN";
        case CmpOp::like: return "LIKE";
        case CmpOp::not_like: return "NOT LIKE";
        case CmpOp::in: return "IN";
        case CmpOp::not_in: return "NOT IN";
    }
    return "=";
}

inline std::string print_colref(const ColumnRef& ref) {
    return ref.table.empty() ? ref.column : ref.table + "." + ref.column;
}

inline std::string print_expr(const SqlExpr& expr, bool select_level_distinct) {
    std::string inner = expr.star ? "*" : print_colref(expr.column);
    if (expr.agg == AggOp::none) return inner;
    std::string out = agg_keyword(expr.agg);
    out += "(";
    if (expr.distinct && !select_level_distinct) out += "DISTINCT ";
    out += inner;
    out += ")";
    return out;
}

inline std::string print_query(const SqlQuery& query);

inline std::string print_condition(const SqlCondition& cond) {
    if (const auto* conj = std::get_if<SqlAnd>(&cond.node)) {
        auto wrap = [](const SqlCondition& c) {
            std::string s = print_condition(c);
            return std::holds_alternative<SqlLeaf>(c.node) ? s : "(" + s + ")";
        };
        return wrap(*conj->left) + " AND " + wrap(*conj->right);
    }
    if (const auto* disj = std::get_if<SqlOr>(&cond.node)) {
        auto wrap = [](const SqlCondition& c) {
            std::string s = print_condition(c);
            return std::holds_alternative<SqlLeaf>(c.node) ? s : "(" + s + ")";
        };
        return wrap(*disj->left) + " OR " + wrap(*disj->right);
    }
    const auto& leaf = std::get<SqlLeaf>(cond.node);
    std::string out = print_expr(leaf.lhs, false);
    out += " ";
    out += cmp_keyword(leaf.op);
    auto literal_at = [&leaf](std::size_t i) {
        return i < leaf.literals.size() ? leaf.literals[i] : std::string("1");
    };
    if (leaf.op == CmpOp::between) {
        out += " " + literal_at(0) + " AND " + literal_at(1);
    } else if (leaf.subquery.has_value()) {
        out += " (" + print_query(**leaf.subquery) + ")";
    } else if (leaf.op == CmpOp::in || leaf.op == CmpOp::not_in) {
        out += " (" + literal_at(0) + ")";
    } else {
        out += " " + literal_at(0);
    }
    return out;
}

inline std::string print_core(const SqlQuery& query) {
    std::string out = "SELECT ";
    bool select_distinct = false;
    for (const SqlExpr& item : query.select)
        if (item.agg == AggOp::none && item.distinct) select_distinct = true;
    if (select_distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < query.select.size(); ++i) {
        if (i > 0) out += ", ";
        out += print_expr(query.select[i], select_distinct);
    }
    out += " FROM ";
    for (std::size_t i = 0; i < query.from.size(); ++i) {
        const SqlJoin& join = query.from[i];
        if (i == 0) {
            out += join.table;
        } else {
            out += " JOIN " + join.table;
            if (join.on.has_value())
                out += " ON " + print_colref(join.on->first) + " = " +
                       print_colref(join.on->second);
        }
    }
    if (query.where.has_value()) out += " WHERE " + print_condition(*query.where);
    if (!query.group_by.empty()) {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < query.group_by.size(); ++i) {
            if (i > 0) out += ", ";
            out += print_colref(query.group_by[i]);
        }
    }
    if (query.having.has_value()) out += " HAVING " + print_condition(*query.having);
    if (query.order_by.has_value()) {
        out += " ORDER BY " + print_expr(query.order_by->target, false);
        out += query.order_by->direction == OrderDir::asc ? " ASC" : " DESC";
    }
    if (query.limit.has_value()) out += " LIMIT " + std::to_string(*query.limit);
    return out;
}

inline std::string print_query(const SqlQuery& query) {
    if (!query.set_op.has_value()) return print_core(query);
    SqlQuery left = query;
    left.set_op.reset();
    return "(" + print_core(left) + ") " + set_op_name(query.set_op->kind) + " (" +
           print_query(*query.set_op->right) + ")";
}

}  // namespace detail

/// Canonical SQL text for the query.
inline std::string print_sql(const SqlQuery& query) { return detail::print_query(query); }

}  // namespace semql
