#pragma once

// SQL -> SemQL lifting. The tree keeps no FROM, GROUP BY, or WHERE/HAVING
// distinction: conditions from both clauses merge under one Filter, '*'
// gets a concrete table assigned, and FROM tables that own no referenced
// column survive as a self-referential "Filter in" condition that lowering
// recognizes and folds back into the join.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semql/errors.hpp"
#include "semql/schema.hpp"
#include "semql/semql_tree.hpp"
#include "semql/sql.hpp"
#include "semql/util.hpp"

namespace semql {

struct LiftOptions {
    /// Table assigned to '*' when the scope leaves it ambiguous. Consulted
    /// per scope; ignored in scopes whose FROM clause does not contain it.
    std::optional<std::string> star_table;
};

namespace detail {

/// Column references owned by this scope's clauses: select, condition
/// operands, GROUP BY, ORDER BY. Join conditions and subquery bodies do not
/// count; they are FROM-clause plumbing and other scopes.
inline void scope_condition_refs(const SqlCondition& cond, std::vector<ColumnRef>& out) {
    if (const auto* conj = std::get_if<SqlAnd>(&cond.node)) {
        scope_condition_refs(*conj->left, out);
        scope_condition_refs(*conj->right, out);
    } else if (const auto* disj = std::get_if<SqlOr>(&cond.node)) {
        scope_condition_refs(*disj->left, out);
        scope_condition_refs(*disj->right, out);
    } else {
        const auto& leaf = std::get<SqlLeaf>(cond.node);
        if (!leaf.lhs.star) out.push_back(leaf.lhs.column);
    }
}

inline std::vector<ColumnRef> scope_refs(const SqlQuery& query) {
    std::vector<ColumnRef> refs;
    for (const SqlExpr& item : query.select)
        if (!item.star) refs.push_back(item.column);
    if (query.where.has_value()) scope_condition_refs(*query.where, refs);
    for (const ColumnRef& ref : query.group_by) refs.push_back(ref);
    if (query.having.has_value()) scope_condition_refs(*query.having, refs);
    if (query.order_by.has_value() && !query.order_by->target.star)
        refs.push_back(query.order_by->target.column);
    return refs;
}

inline bool condition_has_star(const SqlCondition& cond) {
    if (const auto* conj = std::get_if<SqlAnd>(&cond.node))
        return condition_has_star(*conj->left) || condition_has_star(*conj->right);
    if (const auto* disj = std::get_if<SqlOr>(&cond.node))
        return condition_has_star(*disj->left) || condition_has_star(*disj->right);
    return std::get<SqlLeaf>(cond.node).lhs.star;
}

inline bool scope_has_star(const SqlQuery& query) {
    for (const SqlExpr& item : query.select)
        if (item.star) return true;
    if (query.where.has_value() && condition_has_star(*query.where)) return true;
    if (query.having.has_value() && condition_has_star(*query.having)) return true;
    if (query.order_by.has_value() && query.order_by->target.star) return true;
    return false;
}

inline bool table_referenced(const std::string& table, const std::vector<ColumnRef>& refs) {
    for (const ColumnRef& ref : refs)
        if (iequals(ref.table, table)) return true;
    return false;
}

}  // namespace detail

/// Picks the table '*' stands for in this query's top scope, or nullopt when
/// no '*' appears. Prefers the unique FROM table that owns no referenced
/// column; falls back to a single-table FROM, then to the configured
/// override; otherwise the choice is ambiguous.
inline std::optional<std::string> assign_star_table(const SqlQuery& query,
                                                    const Schema& schema,
                                                    const LiftOptions& options = {}) {
    (void)schema;
    if (!detail::scope_has_star(query)) return std::nullopt;
    std::vector<ColumnRef> refs = detail::scope_refs(query);
    std::vector<std::string> unreferenced;
    for (const SqlJoin& join : query.from)
        if (!detail::table_referenced(join.table, refs)) unreferenced.push_back(join.table);
    if (unreferenced.size() == 1) return unreferenced.front();
    if (unreferenced.empty() && query.from.size() == 1) return query.from.front().table;
    if (options.star_table.has_value()) {
        for (const SqlJoin& join : query.from)
            if (iequals(join.table, *options.star_table)) return join.table;
        throw StarAmbiguityError("star table override '" + *options.star_table +
                                 "' is not in the FROM clause");
    }
    std::string tables;
    for (const SqlJoin& join : query.from) {
        if (!tables.empty()) tables += ", ";
        tables += join.table;
    }
    throw StarAmbiguityError("cannot decide which table '*' refers to among: " + tables);
}

namespace detail {

inline ANode lift_expr(const SqlExpr& expr, const std::optional<std::string>& star_table) {
    ANode a;
    a.agg = expr.agg;
    a.distinct = expr.distinct;
    if (expr.star) {
        a.column.column = "*";
        a.table.table = star_table.value();  // star present implies assignment
    } else {
        a.column.column = expr.column.column;
        a.table.table = expr.column.table;
    }
    return a;
}

inline RNode lift_scope(const SqlQuery& query, const Schema& schema,
                        const LiftOptions& options);

inline FilterNode lift_condition(const SqlCondition& cond,
                                 const std::optional<std::string>& star_table,
                                 const Schema& schema, const LiftOptions& options) {
    FilterNode f;
    if (const auto* conj = std::get_if<SqlAnd>(&cond.node)) {
        f.node = AndFilter{
            box<FilterNode>(lift_condition(*conj->left, star_table, schema, options)),
            box<FilterNode>(lift_condition(*conj->right, star_table, schema, options))};
    } else if (const auto* disj = std::get_if<SqlOr>(&cond.node)) {
        f.node = OrFilter{
            box<FilterNode>(lift_condition(*disj->left, star_table, schema, options)),
            box<FilterNode>(lift_condition(*disj->right, star_table, schema, options))};
    } else {
        const auto& leaf = std::get<SqlLeaf>(cond.node);
        ANode operand = lift_expr(leaf.lhs, star_table);
        if (leaf.subquery.has_value()) {
            f.node = SubqueryFilter{leaf.op, std::move(operand),
                                    box<RNode>(lift_scope(**leaf.subquery, schema, options))};
        } else {
            f.node = CmpFilter{leaf.op, std::move(operand), leaf.literals};
        }
    }
    return f;
}

/// The marker condition a FROM table leaves behind when no clause
/// references it: key IN (SELECT key FROM table) over the table's own
/// primary key (or first column).
inline FilterNode unreferenced_table_marker(const Table& table) {
    if (table.columns.empty())
        throw UnsupportedSqlError("table '" + table.name +
                                  "' has no columns to carry a join marker");
    const Column& key = table.primary_key.has_value() ? table.columns[*table.primary_key]
                                                      : table.columns.front();
    ANode operand;
    operand.column.column = key.original_name;
    operand.table.table = table.name;
    RNode subquery;
    subquery.select.items.push_back(operand);
    FilterNode f;
    f.node = SubqueryFilter{CmpOp::in, operand, box<RNode>(std::move(subquery))};
    return f;
}

inline RNode lift_scope(const SqlQuery& query, const Schema& schema,
                        const LiftOptions& options) {
    if (query.select.size() > 5)
        throw UnsupportedSqlError("select list longer than 5 items");
    if (query.limit.has_value() && !query.order_by.has_value())
        throw UnsupportedSqlError("LIMIT without ORDER BY");

    std::optional<std::string> star_table = assign_star_table(query, schema, options);

    RNode r;
    for (const SqlExpr& item : query.select)
        r.select.items.push_back(lift_expr(item, star_table));

    // WHERE then HAVING, merged left to right under one conjunction, then a
    // marker per FROM table no clause references (star assignment counts as
    // a reference).
    std::vector<FilterNode> parts;
    if (query.where.has_value())
        parts.push_back(lift_condition(*query.where, star_table, schema, options));
    if (query.having.has_value())
        parts.push_back(lift_condition(*query.having, star_table, schema, options));
    std::vector<ColumnRef> refs = scope_refs(query);
    for (const SqlJoin& join : query.from) {
        if (table_referenced(join.table, refs)) continue;
        if (star_table.has_value() && iequals(*star_table, join.table)) continue;
        parts.push_back(unreferenced_table_marker(*schema.find_table(join.table)));
    }
    if (!parts.empty()) {
        FilterNode combined = std::move(parts.front());
        for (std::size_t i = 1; i < parts.size(); ++i) {
            FilterNode parent;
            parent.node = AndFilter{box<FilterNode>(std::move(combined)),
                                    box<FilterNode>(std::move(parts[i]))};
            combined = std::move(parent);
        }
        r.filter = std::move(combined);
    }

    if (query.order_by.has_value()) {
        ANode target = lift_expr(query.order_by->target, star_table);
        if (query.limit.has_value())
            r.superlative = SuperlativeNode{query.order_by->direction, *query.limit,
                                            std::move(target)};
        else
            r.order = OrderNode{query.order_by->direction, std::move(target)};
    }

    return r;
}

}  // namespace detail

/// Lifts a resolved SQL query into a SemQL tree.
inline SemQLTree lift_query(const SqlQuery& query, const Schema& schema,
                            const LiftOptions& options = {}) {
    SemQLTree tree;
    if (query.set_op.has_value()) {
        switch (query.set_op->kind) {
            case SqlSetOp::union_: tree.root.kind = ZKind::union_; break;
            case SqlSetOp::except_: tree.root.kind = ZKind::except_; break;
            case SqlSetOp::intersect: tree.root.kind = ZKind::intersect; break;
        }
        SqlQuery left = query;
        left.set_op.reset();
        tree.root.left = detail::lift_scope(left, schema, options);
        tree.root.right = detail::lift_scope(*query.set_op->right, schema, options);
    } else {
        tree.root.kind = ZKind::single;
        tree.root.left = detail::lift_scope(query, schema, options);
    }
    return tree;
}

}  // namespace semql
