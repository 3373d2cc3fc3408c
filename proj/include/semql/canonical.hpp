#pragma once

// Value-erased canonical form for SQL queries. Two queries canonicalize
// equally iff they differ only in literal values, conjunct order, join
// spelling, or capitalization; this is the equality behind exact matching.

#include <algorithm>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "semql/sql.hpp"
#include "semql/util.hpp"

namespace semql {

struct CanonicalForm {
    std::vector<std::string> select_set;   // sorted, deduplicated
    std::vector<std::string> where_set;
    std::vector<std::string> group_set;
    std::vector<std::string> having_set;
    std::vector<std::string> order_set;    // empty or one entry
    std::vector<std::string> from_set;     // table names
    std::vector<std::string> keyword_set;  // clause/connective markers
    std::string set_op;                    // "", "union", "except", "intersect"
    std::string set_op_right;              // serialized canonical of the right side

    friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;

    std::string to_string() const {
        auto block = [](const char* name, const std::vector<std::string>& items) {
            std::string out = std::string(name) + "{";
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i > 0) out += ";";
                out += items[i];
            }
            return out + "}";
        };
        return block("select", select_set) + block("where", where_set) +
               block("group", group_set) + block("having", having_set) +
               block("order", order_set) + block("from", from_set) +
               block("keywords", keyword_set) + "setop{" + set_op + "}" + "right{" +
               set_op_right + "}";
    }
};

namespace detail {

inline std::string canon_expr(const SqlExpr& expr) {
    std::string column = expr.star ? "*" : to_lower(expr.column.table) + "." +
                                               to_lower(expr.column.column);
    std::string out;
    if (expr.distinct) out += "distinct ";
    if (expr.agg == AggOp::none) return out + column;
    return out + agg_name(expr.agg) + "(" + column + ")";
}

inline CanonicalForm canonicalize_query(const SqlQuery& query);

inline void canon_leaves(const SqlCondition& cond, std::vector<std::string>& out,
                         bool& has_or) {
    if (const auto* conj = std::get_if<SqlAnd>(&cond.node)) {
        canon_leaves(*conj->left, out, has_or);
        canon_leaves(*conj->right, out, has_or);
    } else if (const auto* disj = std::get_if<SqlOr>(&cond.node)) {
        has_or = true;
        canon_leaves(*disj->left, out, has_or);
        canon_leaves(*disj->right, out, has_or);
    } else {
        const auto& leaf = std::get<SqlLeaf>(cond.node);
        std::string entry = std::string(cmp_name(leaf.op)) + " " + canon_expr(leaf.lhs);
        if (leaf.subquery.has_value())
            entry += " (" + canonicalize_query(**leaf.subquery).to_string() + ")";
        else
            entry += " value";  // literal values are erased
        out.push_back(entry);
    }
}

inline void sort_unique(std::vector<std::string>& items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
}

inline CanonicalForm canonicalize_query(const SqlQuery& query) {
    CanonicalForm form;
    for (const SqlExpr& item : query.select) form.select_set.push_back(canon_expr(item));
    sort_unique(form.select_set);

    bool where_or = false;
    bool having_or = false;
    if (query.where.has_value()) canon_leaves(*query.where, form.where_set, where_or);
    if (query.having.has_value()) canon_leaves(*query.having, form.having_set, having_or);
    sort_unique(form.where_set);
    sort_unique(form.having_set);

    for (const ColumnRef& ref : query.group_by)
        form.group_set.push_back(to_lower(ref.table) + "." + to_lower(ref.column));
    sort_unique(form.group_set);

    if (query.order_by.has_value())
        form.order_set.push_back(std::string(dir_name(query.order_by->direction)) + " " +
                                 canon_expr(query.order_by->target));

    for (const SqlJoin& join : query.from) form.from_set.push_back(to_lower(join.table));
    sort_unique(form.from_set);

    if (!form.where_set.empty()) form.keyword_set.push_back("where");
    if (!form.group_set.empty()) form.keyword_set.push_back("group_by");
    if (!form.having_set.empty()) form.keyword_set.push_back("having");
    if (!form.order_set.empty()) form.keyword_set.push_back("order_by");
    if (query.limit.has_value()) form.keyword_set.push_back("limit");
    if (where_or || having_or) form.keyword_set.push_back("or");
    if (query.set_op.has_value()) {
        form.set_op = to_lower(set_op_name(query.set_op->kind));
        form.keyword_set.push_back(form.set_op);
        form.set_op_right = canonicalize_query(*query.set_op->right).to_string();
    }
    sort_unique(form.keyword_set);

    return form;
}

}  // namespace detail

/// Canonicalizes a query; the left operand of a set operation contributes
/// the top-level component sets, the right operand folds in serialized.
inline CanonicalForm canonicalize(const SqlQuery& query) {
    return detail::canonicalize_query(query);
}

/// Value-insensitive query equality.
inline bool exact_match(const SqlQuery& predicted, const SqlQuery& gold) {
    return canonicalize(predicted) == canonicalize(gold);
}

}  // namespace semql
