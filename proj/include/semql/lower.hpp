#pragma once

// SemQL -> SQL lowering. Reconstructs everything the tree abstracts away:
// the FROM clause (minimal join cover over the schema graph), GROUP BY
// (inferred from how aggregates and plain columns mix), and the WHERE /
// HAVING split (by whether a condition's operand aggregates). The
// self-referential "Filter in" markers lifting plants for unreferenced FROM
// tables are folded back into the join instead of emitting a condition.

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

namespace detail {

/// True for the marker shape lifting produces: key IN (SELECT key FROM own
/// table) with no aggregation and a bare single-item subquery.
inline bool is_join_marker(const SubqueryFilter& sub) {
    if (sub.op != CmpOp::in) return false;
    const ANode& lhs = sub.operand;
    if (lhs.agg != AggOp::none || lhs.distinct || lhs.column.column == "*") return false;
    const RNode& r = *sub.subquery;
    if (r.filter.has_value() || r.order.has_value() || r.superlative.has_value())
        return false;
    if (r.select.items.size() != 1) return false;
    const ANode& item = r.select.items[0];
    return item.agg == AggOp::none && !item.distinct &&
           iequals(item.column.column, lhs.column.column) &&
           iequals(item.table.table, lhs.table.table);
}

/// Tables named by this scope's T nodes, first mention first, canonical
/// spelling. Subquery bodies belong to their own scope.
inline void scope_tables_a(const ANode& a, const Schema& schema,
                           std::vector<std::string>& out) {
    const Table* table = schema.find_table(a.table.table);
    std::string name = table != nullptr ? table->name : a.table.table;
    for (const std::string& seen : out)
        if (iequals(seen, name)) return;
    out.push_back(name);
}

inline void scope_tables_filter(const FilterNode& f, const Schema& schema,
                                std::vector<std::string>& out) {
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        scope_tables_filter(*conj->left, schema, out);
        scope_tables_filter(*conj->right, schema, out);
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        scope_tables_filter(*disj->left, schema, out);
        scope_tables_filter(*disj->right, schema, out);
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        scope_tables_a(cmp->operand, schema, out);
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        scope_tables_a(sub->operand, schema, out);
    }
}

inline std::vector<std::string> scope_tables(const RNode& r, const Schema& schema) {
    std::vector<std::string> out;
    for (const ANode& a : r.select.items) scope_tables_a(a, schema, out);
    if (r.filter.has_value()) scope_tables_filter(*r.filter, schema, out);
    if (r.order.has_value()) scope_tables_a(r.order->target, schema, out);
    if (r.superlative.has_value()) scope_tables_a(r.superlative->target, schema, out);
    return out;
}

/// A nodes of this scope in pre-order: select, filter operands, ordering
/// target. Subquery bodies excluded.
inline void scope_as_filter(const FilterNode& f, std::vector<const ANode*>& out) {
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        scope_as_filter(*conj->left, out);
        scope_as_filter(*conj->right, out);
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        scope_as_filter(*disj->left, out);
        scope_as_filter(*disj->right, out);
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        out.push_back(&cmp->operand);
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        if (!is_join_marker(*sub)) out.push_back(&sub->operand);
    }
}

inline SqlExpr lower_a(const ANode& a, const Schema& schema) {
    SqlExpr expr;
    expr.agg = a.agg;
    expr.distinct = a.distinct;
    if (a.column.column == "*") {
        expr.star = true;
        return expr;
    }
    const Table* table = schema.find_table(a.table.table);
    expr.column.table = table != nullptr ? table->name : a.table.table;
    const Column* column = table != nullptr ? table->find_column(a.column.column) : nullptr;
    expr.column.column = column != nullptr ? column->original_name : a.column.column;
    return expr;
}

inline SqlQuery lower_scope(const RNode& r, const Schema& schema);

/// Lowers a filter subtree without splitting, for Or branches that must stay
/// together.
inline SqlCondition lower_condition_full(const FilterNode& f, const Schema& schema) {
    SqlCondition cond;
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        cond.node = SqlAnd{box<SqlCondition>(lower_condition_full(*conj->left, schema)),
                           box<SqlCondition>(lower_condition_full(*conj->right, schema))};
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        cond.node = SqlOr{box<SqlCondition>(lower_condition_full(*disj->left, schema)),
                          box<SqlCondition>(lower_condition_full(*disj->right, schema))};
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        cond.node = SqlLeaf{cmp->op, lower_a(cmp->operand, schema), cmp->literals,
                            std::nullopt};
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        if (sub->op == CmpOp::between)
            throw UnsupportedSqlError("between filter with a subquery has no SQL form");
        cond.node = SqlLeaf{sub->op, lower_a(sub->operand, schema), {},
                            box<SqlQuery>(lower_scope(*sub->subquery, schema))};
    }
    return cond;
}

inline bool filter_has_aggregate(const FilterNode& f) {
    if (const auto* conj = std::get_if<AndFilter>(&f.node))
        return filter_has_aggregate(*conj->left) || filter_has_aggregate(*conj->right);
    if (const auto* disj = std::get_if<OrFilter>(&f.node))
        return filter_has_aggregate(*disj->left) || filter_has_aggregate(*disj->right);
    if (const auto* cmp = std::get_if<CmpFilter>(&f.node))
        return cmp->operand.agg != AggOp::none;
    return std::get<SubqueryFilter>(f.node).operand.agg != AggOp::none;
}

inline std::optional<SqlCondition> and_merge(std::optional<SqlCondition> a,
                                             std::optional<SqlCondition> b) {
    if (!a.has_value()) return b;
    if (!b.has_value()) return a;
    SqlCondition merged;
    merged.node = SqlAnd{box<SqlCondition>(std::move(*a)), box<SqlCondition>(std::move(*b))};
    return merged;
}

struct FilterSplit {
    std::optional<SqlCondition> where;
    std::optional<SqlCondition> having;
};

/// Splits a filter into WHERE and HAVING parts: conjunctions split per
/// branch, a disjunction stays whole and lands in HAVING as soon as any of
/// its leaves aggregates, and join markers vanish.
inline FilterSplit split_filter(const FilterNode& f, const Schema& schema) {
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        FilterSplit left = split_filter(*conj->left, schema);
        FilterSplit right = split_filter(*conj->right, schema);
        return FilterSplit{and_merge(std::move(left.where), std::move(right.where)),
                           and_merge(std::move(left.having), std::move(right.having))};
    }
    if (std::holds_alternative<OrFilter>(f.node)) {
        FilterSplit out;
        if (filter_has_aggregate(f)) out.having = lower_condition_full(f, schema);
        else out.where = lower_condition_full(f, schema);
        return out;
    }
    if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        if (is_join_marker(*sub)) return FilterSplit{};
    }
    FilterSplit out;
    if (filter_has_aggregate(f)) out.having = lower_condition_full(f, schema);
    else out.where = lower_condition_full(f, schema);
    return out;
}

inline std::vector<ColumnRef> infer_groupby_scope(const RNode& r, const Schema& schema) {
    std::vector<const ANode*> aggregated;
    for (const ANode& a : r.select.items)
        if (a.agg != AggOp::none) aggregated.push_back(&a);
    bool filter_aggregates = false;
    if (r.filter.has_value()) {
        std::vector<const ANode*> filter_as;
        scope_as_filter(*r.filter, filter_as);
        for (const ANode* a : filter_as)
            if (a->agg != AggOp::none) {
                aggregated.push_back(a);
                filter_aggregates = true;
            }
    }
    bool superlative_aggregates = false;
    if (r.order.has_value() && r.order->target.agg != AggOp::none)
        aggregated.push_back(&r.order->target);
    if (r.superlative.has_value() && r.superlative->target.agg != AggOp::none) {
        aggregated.push_back(&r.superlative->target);
        superlative_aggregates = true;
    }
    if (aggregated.empty()) return {};

    // Aggregates next to plain select columns group by those columns.
    std::vector<ColumnRef> plain;
    for (const ANode& a : r.select.items) {
        if (a.agg != AggOp::none || a.column.column == "*") continue;
        SqlExpr expr = lower_a(a, schema);
        bool seen = false;
        for (const ColumnRef& ref : plain)
            if (iequals(ref.table, expr.column.table) &&
                iequals(ref.column, expr.column.column))
                seen = true;
        if (!seen) plain.push_back(expr.column);
    }
    if (!plain.empty()) return plain;

    // Only aggregates: grouping is needed when a condition binds an
    // aggregate (it must become HAVING) or a superlative ranks one; the
    // group key is the primary key of the first aggregated A's table.
    if (!filter_aggregates && !superlative_aggregates) return {};
    const ANode* first = aggregated.front();
    const Table* table = schema.find_table(first->table.table);
    if (table == nullptr || !table->primary_key.has_value())
        throw MissingPrimaryKeyError("table '" + first->table.table +
                                     "' has no primary key to group by");
    return {ColumnRef{table->name, table->columns[*table->primary_key].original_name}};
}

inline std::vector<SqlJoin> infer_from_scope(const RNode& r, const Schema& schema) {
    std::vector<std::string> tables = scope_tables(r, schema);
    SchemaGraph graph = build_schema_graph(schema);
    std::vector<JoinStep> steps = join_path(graph, tables);
    std::vector<SqlJoin> from;
    for (const JoinStep& step : steps) {
        SqlJoin join{step.table, std::nullopt};
        if (step.fk.has_value()) {
            const ForeignKey& fk = schema.foreign_keys[*step.fk];
            join.on = std::make_pair(fk.from, fk.to);
        }
        from.push_back(std::move(join));
    }
    return from;
}

inline SqlQuery lower_scope(const RNode& r, const Schema& schema) {
    SqlQuery query;
    for (const ANode& a : r.select.items) query.select.push_back(lower_a(a, schema));
    // SELECT DISTINCT is row-level: one distinct bare column makes the whole
    // plain part distinct.
    bool any_distinct_bare = false;
    for (const SqlExpr& item : query.select)
        if (item.agg == AggOp::none && item.distinct) any_distinct_bare = true;
    if (any_distinct_bare)
        for (SqlExpr& item : query.select)
            if (item.agg == AggOp::none) item.distinct = true;

    query.from = infer_from_scope(r, schema);
    if (r.filter.has_value()) {
        FilterSplit split = split_filter(*r.filter, schema);
        query.where = std::move(split.where);
        query.having = std::move(split.having);
    }
    query.group_by = infer_groupby_scope(r, schema);
    if (r.order.has_value())
        query.order_by = SqlOrderBy{r.order->direction, lower_a(r.order->target, schema)};
    if (r.superlative.has_value()) {
        query.order_by =
            SqlOrderBy{r.superlative->direction, lower_a(r.superlative->target, schema)};
        query.limit = r.superlative->limit;
    }
    return query;
}

}  // namespace detail

/// Inferred GROUP BY for the tree's first query block.
inline std::vector<ColumnRef> infer_groupby(const SemQLTree& tree, const Schema& schema) {
    return detail::infer_groupby_scope(tree.root.left, schema);
}

/// Inferred FROM clause (join order) for the tree's first query block.
inline std::vector<SqlJoin> infer_from_clause(const SemQLTree& tree, const Schema& schema) {
    return detail::infer_from_scope(tree.root.left, schema);
}

/// Lowers a valid tree to SQL; a tree with violations is rejected up front.
inline SqlQuery lower_query(const SemQLTree& tree, const Schema& schema) {
    std::vector<Violation> violations = validate(tree, schema);
    if (!violations.empty()) {
        std::string message = violations.front().path + ": " + violations.front().message;
        if (violations.size() > 1)
            message += " (and " + std::to_string(violations.size() - 1) + " more)";
        throw SemQLValidationError(message);
    }
    SqlQuery query = detail::lower_scope(tree.root.left, schema);
    if (tree.root.kind != ZKind::single) {
        SqlSetOp kind = tree.root.kind == ZKind::union_    ? SqlSetOp::union_
                        : tree.root.kind == ZKind::except_ ? SqlSetOp::except_
                                                           : SqlSetOp::intersect;
        query.set_op =
            SqlSetOpClause{kind, box<SqlQuery>(detail::lower_scope(*tree.root.right, schema))};
    }
    return query;
}

}  // namespace semql
