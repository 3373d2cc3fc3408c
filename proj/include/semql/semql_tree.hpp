#pragma once

// SemQL tree model and grammar. SemQL is a tree-structured query form whose
// nodes abstract away FROM clauses, GROUP BY, and the WHERE/HAVING split;
// those are reconstructed from the schema when a tree is turned back into
// SQL. Trees are immutable values.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semql/errors.hpp"
#include "semql/schema.hpp"
#include "semql/util.hpp"

namespace semql {

enum class AggOp { none, max, min, count, sum, avg };
enum class OrderDir { asc, desc };
enum class CmpOp { eq, ne, lt, gt, le, ge, between, like, not_like, in, not_in };
enum class ZKind { intersect, union_, except_, single };

inline const char* agg_name(AggOp a) {
    switch (a) {
        case AggOp::none: return "none";
        case AggOp::max: return "max";
        case AggOp::min: return "min";
        case AggOp::count: return "count";
        case AggOp::sum: return "sum";
        case AggOp::avg: return "avg";
    }
    return "none";
}

inline const char* dir_name(OrderDir d) { return d == OrderDir::asc ? "asc" : "desc"; }

inline const char* cmp_name(CmpOp op) {
    switch (op) {
        case CmpOp::eq: return "=";
        case CmpOp::ne: return "!=";
        case CmpOp::lt: return "<";
        case CmpOp::gt: return ">";
        case CmpOp::le: return "<=";
        case CmpOp::ge: return ">=";
        case CmpOp::between: return "between";
        case CmpOp::like: return "like";
        case CmpOp::not_like: return "not_like";
        case CmpOp::in: return "in";
        case CmpOp::not_in: return "not_in";
    }
    return "=";
}

inline const char* zkind_name(ZKind k) {
    switch (k) {
        case ZKind::intersect: return "intersect";
        case ZKind::union_: return "union";
        case ZKind::except_: return "except";
        case ZKind::single: return "single";
    }
    return "single";
}

/// Column leaf; "*" selects all columns, "" marks a slot not yet filled
/// (skeletons and partial derivations).
struct CNode {
    std::string column;

    friend bool operator==(const CNode&, const CNode&) = default;
};

/// Table leaf; "" marks a slot not yet filled.
struct TNode {
    std::string table;

    friend bool operator==(const TNode&, const TNode&) = default;
};

/// Aggregated column: an aggregate op over a column of a table. distinct is
/// payload carried through from SQL, not part of the grammar.
struct ANode {
    AggOp agg = AggOp::none;
    bool distinct = false;
    CNode column;
    TNode table;

    friend bool operator==(const ANode&, const ANode&) = default;
};

struct RNode;
struct FilterNode;

struct AndFilter {
    box<FilterNode> left;
    box<FilterNode> right;

    friend bool operator==(const AndFilter&, const AndFilter&) = default;
};

struct OrFilter {
    box<FilterNode> left;
    box<FilterNode> right;

    friend bool operator==(const OrFilter&, const OrFilter&) = default;
};

/// Comparison against literal values. Literals are payload: between carries
/// two (or none), other ops one (or none).
struct CmpFilter {
    CmpOp op = CmpOp::eq;
    ANode operand;
    std::vector<std::string> literals;

    friend bool operator==(const CmpFilter&, const CmpFilter&) = default;
};

/// Comparison against a subquery.
struct SubqueryFilter {
    CmpOp op = CmpOp::in;
    ANode operand;
    box<RNode> subquery;

    friend bool operator==(const SubqueryFilter&, const SubqueryFilter&) = default;
};

struct FilterNode {
    // Defaults to the leaf alternative; defaulting to AndFilter would
    // default-construct boxed FilterNodes without bound.
    std::variant<AndFilter, OrFilter, CmpFilter, SubqueryFilter> node = CmpFilter{};

    friend bool operator==(const FilterNode&, const FilterNode&) = default;
};

struct SelectNode {
    std::vector<ANode> items;  // 1..5

    friend bool operator==(const SelectNode&, const SelectNode&) = default;
};

struct OrderNode {
    OrderDir direction = OrderDir::asc;
    ANode target;

    friend bool operator==(const OrderNode&, const OrderNode&) = default;
};

/// Ordering truncated to the top rows; limit is payload (defaults to 1).
struct SuperlativeNode {
    OrderDir direction = OrderDir::asc;
    long limit = 1;
    ANode target;

    friend bool operator==(const SuperlativeNode&, const SuperlativeNode&) = default;
};

/// One query block: a Select plus optional Filter and at most one of
/// Order / Superlative.
struct RNode {
    SelectNode select;
    std::optional<FilterNode> filter;
    std::optional<OrderNode> order;
    std::optional<SuperlativeNode> superlative;

    friend bool operator==(const RNode&, const RNode&) = default;
};

/// Root: a single query block or a set operation over two blocks.
struct ZNode {
    ZKind kind = ZKind::single;
    RNode left;
    std::optional<RNode> right;  // present iff kind != single

    friend bool operator==(const ZNode&, const ZNode&) = default;
};

struct SemQLTree {
    ZNode root;

    friend bool operator==(const SemQLTree&, const SemQLTree&) = default;
};

using Skeleton = SemQLTree;

// ---------------------------------------------------------------------------
// Grammar

enum class NodeKind { Z, R, Select, A, Filter, Order, Superlative, C, T };

inline const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Z: return "Z";
        case NodeKind::R: return "R";
        case NodeKind::Select: return "Select";
        case NodeKind::A: return "A";
        case NodeKind::Filter: return "Filter";
        case NodeKind::Order: return "Order";
        case NodeKind::Superlative: return "Superlative";
        case NodeKind::C: return "C";
        case NodeKind::T: return "T";
    }
    return "?";
}

/// One production. Rule ids are dense, stable, and define the ApplyRule
/// action vocabulary:
///   0..3    Z    -> intersect R R | union R R | except R R | R
///   4..9    R    -> Select [Filter] [Order|Superlative]  (6 shapes)
///   10..14  Select -> A{1..5}
///   15..20  A    -> none|max|min|count|sum|avg C T
///   21..22  Filter -> and F F | or F F
///   23..33  Filter -> op A       (11 comparison ops, literal form)
///   34..44  Filter -> op A R     (same ops, subquery form)
///   45..46  Order -> asc A | desc A
///   47..48  Superlative -> asc A | desc A
struct GrammarRule {
    int id;
    NodeKind lhs;
    std::vector<NodeKind> rhs;  // child slots, left to right
    std::string label;

    friend bool operator==(const GrammarRule&, const GrammarRule&) = default;
};

inline const std::vector<GrammarRule>& grammar_rules() {
    static const std::vector<GrammarRule> rules = [] {
        std::vector<GrammarRule> r;
        auto add = [&r](NodeKind lhs, std::vector<NodeKind> rhs, std::string label) {
            r.push_back(GrammarRule{static_cast<int>(r.size()), lhs, std::move(rhs),
                                    std::move(label)});
        };
        const NodeKind Z = NodeKind::Z, R = NodeKind::R, S = NodeKind::Select,
                       A = NodeKind::A, F = NodeKind::Filter, O = NodeKind::Order,
                       Sup = NodeKind::Superlative, C = NodeKind::C, T = NodeKind::T;
        add(Z, {R, R}, "Z -> intersect R R");
        add(Z, {R, R}, "Z -> union R R");
        add(Z, {R, R}, "Z -> except R R");
        add(Z, {R}, "Z -> R");
        add(R, {S}, "R -> Select");
        add(R, {S, F}, "R -> Select Filter");
        add(R, {S, O}, "R -> Select Order");
        add(R, {S, Sup}, "R -> Select Superlative");
        add(R, {S, F, O}, "R -> Select Filter Order");
        add(R, {S, F, Sup}, "R -> Select Filter Superlative");
        for (int n = 1; n <= 5; ++n)
            add(S, std::vector<NodeKind>(static_cast<std::size_t>(n), A),
                "Select -> " + std::to_string(n) + " A");
        for (AggOp agg : {AggOp::none, AggOp::max, AggOp::min, AggOp::count, AggOp::sum,
                          AggOp::avg})
            add(A, {C, T}, std::string("A -> ") + agg_name(agg) + " C T");
        add(F, {F, F}, "Filter -> and Filter Filter");
        add(F, {F, F}, "Filter -> or Filter Filter");
        for (CmpOp op : {CmpOp::eq, CmpOp::ne, CmpOp::lt, CmpOp::gt, CmpOp::le, CmpOp::ge,
                         CmpOp::between, CmpOp::like, CmpOp::not_like, CmpOp::in,
                         CmpOp::not_in})
            add(F, {A}, std::string("Filter -> ") + cmp_name(op) + " A");
        for (CmpOp op : {CmpOp::eq, CmpOp::ne, CmpOp::lt, CmpOp::gt, CmpOp::le, CmpOp::ge,
                         CmpOp::between, CmpOp::like, CmpOp::not_like, CmpOp::in,
                         CmpOp::not_in})
            add(F, {A, R}, std::string("Filter -> ") + cmp_name(op) + " A R");
        add(O, {A}, "Order -> asc A");
        add(O, {A}, "Order -> desc A");
        add(Sup, {A}, "Superlative -> asc A");
        add(Sup, {A}, "Superlative -> desc A");
        return r;
    }();
    return rules;
}

// Rule id lookups; the inverses below decode an id back to its payload.

inline int rule_for_z(ZKind k) {
    switch (k) {
        case ZKind::intersect: return 0;
        case ZKind::union_: return 1;
        case ZKind::except_: return 2;
        case ZKind::single: return 3;
    }
    return 3;
}

inline int rule_for_r(bool has_filter, bool has_order, bool has_superlative) {
    if (has_filter && has_superlative) return 9;
    if (has_filter && has_order) return 8;
    if (has_superlative) return 7;
    if (has_order) return 6;
    if (has_filter) return 5;
    return 4;
}

inline int rule_for_select(std::size_t arity) { return 10 + static_cast<int>(arity) - 1; }
inline int rule_for_agg(AggOp agg) { return 15 + static_cast<int>(agg); }
inline int rule_for_and() { return 21; }
inline int rule_for_or() { return 22; }
inline int rule_for_cmp(CmpOp op, bool subquery) {
    return (subquery ? 34 : 23) + static_cast<int>(op);
}
inline int rule_for_order(OrderDir d) { return 45 + (d == OrderDir::desc ? 1 : 0); }
inline int rule_for_superlative(OrderDir d) { return 47 + (d == OrderDir::desc ? 1 : 0); }

inline ZKind zkind_of_rule(int id) { return static_cast<ZKind>(id); }
inline AggOp agg_of_rule(int id) { return static_cast<AggOp>(id - 15); }
inline CmpOp cmp_of_rule(int id) {
    return static_cast<CmpOp>(id >= 34 ? id - 34 : id - 23);
}
inline bool cmp_rule_has_subquery(int id) { return id >= 34; }
inline OrderDir dir_of_order_rule(int id) {
    return id == 45 ? OrderDir::asc : OrderDir::desc;
}
inline OrderDir dir_of_superlative_rule(int id) {
    return id == 47 ? OrderDir::asc : OrderDir::desc;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::string path;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

inline void validate_a(const ANode& a, const Schema& schema, const std::string& path,
                       std::vector<Violation>& out) {
    if (a.column.column.empty())
        out.push_back({path, "A node missing column declaration"});
    if (a.table.table.empty()) {
        out.push_back({path, "A node missing table declaration"});
        return;
    }
    const Table* table = schema.find_table(a.table.table);
    if (table == nullptr) {
        out.push_back({path, "unknown table '" + a.table.table + "'"});
        return;
    }
    if (!a.column.column.empty() && a.column.column != "*" &&
        table->find_column(a.column.column) == nullptr)
        out.push_back({path, "table '" + a.table.table + "' has no column '" +
                                 a.column.column + "'"});
}

inline void validate_r(const RNode& r, const Schema& schema, const std::string& path,
                       std::vector<Violation>& out);

inline void validate_filter(const FilterNode& f, const Schema& schema,
                            const std::string& path, std::vector<Violation>& out) {
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        validate_filter(*conj->left, schema, path + "/left", out);
        validate_filter(*conj->right, schema, path + "/right", out);
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        validate_filter(*disj->left, schema, path + "/left", out);
        validate_filter(*disj->right, schema, path + "/right", out);
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        validate_a(cmp->operand, schema, path + "/A", out);
        if (cmp->op == CmpOp::between) {
            if (cmp->literals.size() != 0 && cmp->literals.size() != 2)
                out.push_back({path, "between filter carries zero or two literals"});
        } else if (cmp->literals.size() > 1) {
            out.push_back({path, "comparison filter carries at most one literal"});
        }
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        validate_a(sub->operand, schema, path + "/A", out);
        validate_r(*sub->subquery, schema, path + "/R", out);
    }
}

inline void validate_r(const RNode& r, const Schema& schema, const std::string& path,
                       std::vector<Violation>& out) {
    if (r.select.items.empty() || r.select.items.size() > 5)
        out.push_back({path + "/Select", "Select must carry between 1 and 5 items"});
    for (std::size_t i = 0; i < r.select.items.size(); ++i)
        validate_a(r.select.items[i], schema,
                   path + "/Select/A[" + std::to_string(i) + "]", out);
    if (r.filter.has_value()) validate_filter(*r.filter, schema, path + "/Filter", out);
    if (r.order.has_value() && r.superlative.has_value())
        out.push_back({path, "R carries both Order and Superlative"});
    if (r.order.has_value()) validate_a(r.order->target, schema, path + "/Order/A", out);
    if (r.superlative.has_value()) {
        if (r.superlative->limit < 1)
            out.push_back({path + "/Superlative", "Superlative limit must be >= 1"});
        validate_a(r.superlative->target, schema, path + "/Superlative/A", out);
    }
}

}  // namespace detail

/// Reports every grammar and schema-consistency violation in the tree.
/// An empty result means the tree is valid over the schema.
inline std::vector<Violation> validate(const SemQLTree& tree, const Schema& schema) {
    std::vector<Violation> out;
    const ZNode& z = tree.root;
    if (z.kind == ZKind::single && z.right.has_value())
        out.push_back({"Z", "single query must not carry a second operand"});
    if (z.kind != ZKind::single && !z.right.has_value())
        out.push_back({"Z", std::string(zkind_name(z.kind)) + " requires two operands"});
    detail::validate_r(z.left, schema, "Z/R", out);
    if (z.right.has_value()) detail::validate_r(*z.right, schema, "Z/R2", out);
    return out;
}

// ---------------------------------------------------------------------------
// Skeleton extraction

namespace detail {

inline RNode skeleton_r(const RNode& r);

inline FilterNode skeleton_filter(const FilterNode& f) {
    FilterNode out;
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        out.node = AndFilter{box<FilterNode>(skeleton_filter(*conj->left)),
                             box<FilterNode>(skeleton_filter(*conj->right))};
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        out.node = OrFilter{box<FilterNode>(skeleton_filter(*disj->left)),
                            box<FilterNode>(skeleton_filter(*disj->right))};
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        out.node = CmpFilter{cmp->op, ANode{}, {}};
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        out.node = SubqueryFilter{sub->op, ANode{}, box<RNode>(skeleton_r(*sub->subquery))};
    }
    return out;
}

inline RNode skeleton_r(const RNode& r) {
    RNode out;
    out.select.items.assign(r.select.items.size(), ANode{});
    if (r.filter.has_value()) out.filter = skeleton_filter(*r.filter);
    if (r.order.has_value()) out.order = OrderNode{r.order->direction, ANode{}};
    if (r.superlative.has_value())
        out.superlative = SuperlativeNode{r.superlative->direction, 1, ANode{}};
    return out;
}

}  // namespace detail

/// Strips everything below each A node (aggregate, column, table, distinct)
/// along with filter literals and superlative limits, leaving the query
/// shape. Idempotent.
inline Skeleton extract_skeleton(const SemQLTree& tree) {
    Skeleton out;
    out.root.kind = tree.root.kind;
    out.root.left = detail::skeleton_r(tree.root.left);
    if (tree.root.right.has_value())
        out.root.right = detail::skeleton_r(*tree.root.right);
    return out;
}

}  // namespace semql
