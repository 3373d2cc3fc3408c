#pragma once

// Transition system over the SemQL grammar. A tree derives as a pre-order
// action sequence: ApplyRule expands the frontier's top slot by a grammar
// rule, SelectColumn fills a C slot (from the schema the first time, from
// memory on repeats), SelectTable fills a T slot. Literals, limits and
// distinct flags are payload the actions do not carry, so trees rebuilt
// from actions are literal-free with default limits.

#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "semql/errors.hpp"
#include "semql/schema.hpp"
#include "semql/semql_tree.hpp"
#include "semql/util.hpp"

namespace semql {

enum class ColumnSource { schema, memory };

struct ApplyRuleAction {
    int rule = 0;

    friend bool operator==(const ApplyRuleAction&, const ApplyRuleAction&) = default;
};

struct SelectColumnAction {
    std::string column;
    ColumnSource source = ColumnSource::schema;

    friend bool operator==(const SelectColumnAction&, const SelectColumnAction&) = default;
};

struct SelectTableAction {
    std::string table;

    friend bool operator==(const SelectTableAction&, const SelectTableAction&) = default;
};

using Action = std::variant<ApplyRuleAction, SelectColumnAction, SelectTableAction>;

/// One unexpanded slot on the derivation frontier. For T slots,
/// pending_column is the column chosen for the enclosing A node, which
/// constrains the tables that may be selected.
struct FrontierSlot {
    NodeKind kind = NodeKind::Z;
    std::string pending_column;

    friend bool operator==(const FrontierSlot&, const FrontierSlot&) = default;
};

/// Immutable derivation state; apply() returns the successor state.
class DerivationState {
public:
    static DerivationState initial(const Schema& schema) {
        DerivationState state;
        state.schema_ = &schema;
        state.frontier_.push_back(FrontierSlot{NodeKind::Z, ""});
        state.available_.push_back("*");
        for (const Table& table : schema.tables)
            for (const Column& column : table.columns)
                if (!contains_ci(state.available_, column.original_name) &&
                    !contains_ci(state.memory_, column.original_name))
                    state.available_.push_back(column.original_name);
        return state;
    }

    const Schema& schema() const { return *schema_; }
    const std::vector<Action>& actions() const { return actions_; }
    const std::vector<FrontierSlot>& frontier() const { return frontier_; }
    /// Columns already chosen once, oldest first.
    const std::vector<std::string>& memory() const { return memory_; }
    /// Columns not yet chosen, schema order, '*' first.
    const std::vector<std::string>& available() const { return available_; }
    bool complete() const { return frontier_.empty(); }

    DerivationState apply(const Action& action) const {
        DerivationState next = *this;
        std::size_t index = actions_.size();
        if (frontier_.empty())
            throw IllegalActionError(index, "derivation is already complete");
        FrontierSlot top = frontier_.back();
        next.frontier_.pop_back();

        if (const auto* rule_action = std::get_if<ApplyRuleAction>(&action)) {
            const auto& rules = grammar_rules();
            if (rule_action->rule < 0 ||
                static_cast<std::size_t>(rule_action->rule) >= rules.size())
                throw IllegalActionError(index, "unknown rule id " +
                                                    std::to_string(rule_action->rule));
            const GrammarRule& rule = rules[static_cast<std::size_t>(rule_action->rule)];
            if (rule.lhs != top.kind)
                throw IllegalActionError(
                    index, std::string("rule '") + rule.label + "' does not expand a " +
                               node_kind_name(top.kind) + " slot");
            for (std::size_t i = rule.rhs.size(); i-- > 0;)
                next.frontier_.push_back(FrontierSlot{rule.rhs[i], ""});
        } else if (const auto* col = std::get_if<SelectColumnAction>(&action)) {
            if (top.kind != NodeKind::C)
                throw IllegalActionError(index, "column selected while a " +
                                                    std::string(node_kind_name(top.kind)) +
                                                    " slot is open");
            if (col->source == ColumnSource::schema) {
                auto it = find_ci(next.available_, col->column);
                if (it == next.available_.end())
                    throw IllegalActionError(index, "column '" + col->column +
                                                        "' is not available from the schema");
                next.memory_.push_back(*it);
                next.available_.erase(it);
            } else {
                if (find_ci(next.memory_, col->column) == next.memory_.end())
                    throw IllegalActionError(index, "column '" + col->column +
                                                        "' is not in memory");
            }
            if (!next.frontier_.empty() && next.frontier_.back().kind == NodeKind::T)
                next.frontier_.back().pending_column = col->column;
        } else if (const auto* tab = std::get_if<SelectTableAction>(&action)) {
            if (top.kind != NodeKind::T)
                throw IllegalActionError(index, "table selected while a " +
                                                    std::string(node_kind_name(top.kind)) +
                                                    " slot is open");
            const Table* table = schema_->find_table(tab->table);
            if (table == nullptr)
                throw IllegalActionError(index, "unknown table '" + tab->table + "'");
            if (!top.pending_column.empty() && top.pending_column != "*" &&
                table->find_column(top.pending_column) == nullptr)
                throw IllegalActionError(index, "table '" + tab->table +
                                                    "' has no column '" +
                                                    top.pending_column + "'");
        }

        next.actions_.push_back(action);
        return next;
    }

    /// Rebuilds the derived tree; throws when slots remain open.
    SemQLTree finish() const {
        if (!frontier_.empty())
            throw IncompleteDerivationError(
                std::to_string(frontier_.size()) + " slot(s) still open, next is " +
                node_kind_name(frontier_.back().kind));
        std::size_t pos = 0;
        SemQLTree tree;
        tree.root = build_z(pos);
        return tree;
    }

private:
    const Schema* schema_ = nullptr;
    std::vector<Action> actions_;
    std::vector<FrontierSlot> frontier_;
    std::vector<std::string> memory_;
    std::vector<std::string> available_;

    static std::vector<std::string>::iterator find_ci(std::vector<std::string>& names,
                                                      const std::string& name) {
        for (auto it = names.begin(); it != names.end(); ++it)
            if (iequals(*it, name)) return it;
        return names.end();
    }

    static bool contains_ci(const std::vector<std::string>& names, const std::string& name) {
        for (const std::string& n : names)
            if (iequals(n, name)) return true;
        return false;
    }

    int take_rule(std::size_t& pos) const {
        return std::get<ApplyRuleAction>(actions_[pos++]).rule;
    }

    ZNode build_z(std::size_t& pos) const {
        int rule = take_rule(pos);
        ZNode z;
        z.kind = zkind_of_rule(rule);
        z.left = build_r(pos);
        if (z.kind != ZKind::single) z.right = build_r(pos);
        return z;
    }

    RNode build_r(std::size_t& pos) const {
        int rule = take_rule(pos);
        RNode r;
        r.select = build_select(pos);
        if (rule == 5 || rule == 8 || rule == 9) r.filter = build_filter(pos);
        if (rule == 6 || rule == 8) r.order = build_order(pos);
        if (rule == 7 || rule == 9) r.superlative = build_superlative(pos);
        return r;
    }

    SelectNode build_select(std::size_t& pos) const {
        int rule = take_rule(pos);
        SelectNode select;
        for (int i = 0; i < rule - 10 + 1; ++i) select.items.push_back(build_a(pos));
        return select;
    }

    ANode build_a(std::size_t& pos) const {
        int rule = take_rule(pos);
        ANode a;
        a.agg = agg_of_rule(rule);
        a.column.column = std::get<SelectColumnAction>(actions_[pos++]).column;
        a.table.table = std::get<SelectTableAction>(actions_[pos++]).table;
        return a;
    }

    FilterNode build_filter(std::size_t& pos) const {
        int rule = take_rule(pos);
        FilterNode f;
        if (rule == rule_for_and()) {
            box<FilterNode> left(build_filter(pos));
            box<FilterNode> right(build_filter(pos));
            f.node = AndFilter{std::move(left), std::move(right)};
        } else if (rule == rule_for_or()) {
            box<FilterNode> left(build_filter(pos));
            box<FilterNode> right(build_filter(pos));
            f.node = OrFilter{std::move(left), std::move(right)};
        } else if (cmp_rule_has_subquery(rule)) {
            ANode operand = build_a(pos);
            f.node = SubqueryFilter{cmp_of_rule(rule), std::move(operand),
                                    box<RNode>(build_r(pos))};
        } else {
            f.node = CmpFilter{cmp_of_rule(rule), build_a(pos), {}};
        }
        return f;
    }

    OrderNode build_order(std::size_t& pos) const {
        int rule = take_rule(pos);
        return OrderNode{dir_of_order_rule(rule), build_a(pos)};
    }

    SuperlativeNode build_superlative(std::size_t& pos) const {
        int rule = take_rule(pos);
        return SuperlativeNode{dir_of_superlative_rule(rule), 1, build_a(pos)};
    }
};

namespace detail {

inline void actions_for_a(const ANode& a, std::vector<Action>& out,
                          std::vector<std::string>& chosen) {
    out.push_back(ApplyRuleAction{rule_for_agg(a.agg)});
    bool seen = false;
    for (const std::string& name : chosen)
        if (iequals(name, a.column.column)) seen = true;
    out.push_back(SelectColumnAction{a.column.column,
                                     seen ? ColumnSource::memory : ColumnSource::schema});
    if (!seen) chosen.push_back(a.column.column);
    out.push_back(SelectTableAction{a.table.table});
}

inline void actions_for_r(const RNode& r, std::vector<Action>& out,
                          std::vector<std::string>& chosen);

inline void actions_for_filter(const FilterNode& f, std::vector<Action>& out,
                               std::vector<std::string>& chosen) {
    if (const auto* conj = std::get_if<AndFilter>(&f.node)) {
        out.push_back(ApplyRuleAction{rule_for_and()});
        actions_for_filter(*conj->left, out, chosen);
        actions_for_filter(*conj->right, out, chosen);
    } else if (const auto* disj = std::get_if<OrFilter>(&f.node)) {
        out.push_back(ApplyRuleAction{rule_for_or()});
        actions_for_filter(*disj->left, out, chosen);
        actions_for_filter(*disj->right, out, chosen);
    } else if (const auto* cmp = std::get_if<CmpFilter>(&f.node)) {
        out.push_back(ApplyRuleAction{rule_for_cmp(cmp->op, false)});
        actions_for_a(cmp->operand, out, chosen);
    } else if (const auto* sub = std::get_if<SubqueryFilter>(&f.node)) {
        out.push_back(ApplyRuleAction{rule_for_cmp(sub->op, true)});
        actions_for_a(sub->operand, out, chosen);
        actions_for_r(*sub->subquery, out, chosen);
    }
}

inline void actions_for_r(const RNode& r, std::vector<Action>& out,
                          std::vector<std::string>& chosen) {
    out.push_back(ApplyRuleAction{rule_for_r(r.filter.has_value(), r.order.has_value(),
                                             r.superlative.has_value())});
    out.push_back(ApplyRuleAction{rule_for_select(r.select.items.size())});
    for (const ANode& a : r.select.items) actions_for_a(a, out, chosen);
    if (r.filter.has_value()) actions_for_filter(*r.filter, out, chosen);
    if (r.order.has_value()) {
        out.push_back(ApplyRuleAction{rule_for_order(r.order->direction)});
        actions_for_a(r.order->target, out, chosen);
    }
    if (r.superlative.has_value()) {
        out.push_back(ApplyRuleAction{rule_for_superlative(r.superlative->direction)});
        actions_for_a(r.superlative->target, out, chosen);
    }
}

}  // namespace detail

/// Pre-order action sequence deriving the tree's grammar content. Distinct
/// flags, filter literals and superlative limits are not represented.
inline std::vector<Action> to_actions(const SemQLTree& tree) {
    std::vector<Action> out;
    std::vector<std::string> chosen;
    out.push_back(ApplyRuleAction{rule_for_z(tree.root.kind)});
    detail::actions_for_r(tree.root.left, out, chosen);
    if (tree.root.right.has_value()) detail::actions_for_r(*tree.root.right, out, chosen);
    return out;
}

/// Replays actions from the initial state and rebuilds the tree. Throws
/// IllegalActionError (with the offending index) or
/// IncompleteDerivationError.
inline SemQLTree from_actions(const std::vector<Action>& actions, const Schema& schema) {
    DerivationState state = DerivationState::initial(schema);
    for (const Action& action : actions) state = state.apply(action);
    return state.finish();
}

/// Every action legal at this state, in a deterministic order: grammar rules
/// by id for expandable slots; schema columns (schema order) then memory
/// columns (selection order) for C slots; tables containing the pending
/// column (schema order) for T slots.
inline std::vector<Action> applicable_actions(const DerivationState& state) {
    std::vector<Action> out;
    if (state.complete()) return out;
    const FrontierSlot& top = state.frontier().back();
    switch (top.kind) {
        case NodeKind::C:
            for (const std::string& column : state.available())
                out.push_back(SelectColumnAction{column, ColumnSource::schema});
            for (const std::string& column : state.memory())
                out.push_back(SelectColumnAction{column, ColumnSource::memory});
            break;
        case NodeKind::T:
            for (const Table& table : state.schema().tables) {
                if (top.pending_column.empty() || top.pending_column == "*" ||
                    table.find_column(top.pending_column) != nullptr)
                    out.push_back(SelectTableAction{table.name});
            }
            break;
        default:
            for (const GrammarRule& rule : grammar_rules())
                if (rule.lhs == top.kind) out.push_back(ApplyRuleAction{rule.id});
            break;
    }
    return out;
}

/// Line form, one action per line:
///   APPLY <rule-id>
///   COL <table>.<column> <schema|memory>
///   TAB <table>
/// A COL line takes its table from the TAB action that follows it, which the
/// grammar guarantees (C and T are siblings under A).
inline std::string print_actions(const std::vector<Action>& actions) {
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (const auto* rule = std::get_if<ApplyRuleAction>(&actions[i])) {
            out += "APPLY " + std::to_string(rule->rule);
        } else if (const auto* col = std::get_if<SelectColumnAction>(&actions[i])) {
            if (i + 1 >= actions.size() ||
                !std::holds_alternative<SelectTableAction>(actions[i + 1]))
                throw std::invalid_argument(
                    "column action not followed by a table action");
            const auto& tab = std::get<SelectTableAction>(actions[i + 1]);
            out += "COL " + tab.table + "." + col->column + " " +
                   (col->source == ColumnSource::schema ? "schema" : "memory");
        } else if (const auto* tab = std::get_if<SelectTableAction>(&actions[i])) {
            out += "TAB " + tab->table;
        }
        out += "\n";
    }
    return out;
}

/// Parses the line form back into actions.
inline std::vector<Action> parse_actions(const std::string& text) {
    std::vector<Action> out;
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        std::size_t line_offset = offset;
        offset += line.size() + 1;
        std::istringstream fields(line);
        std::string op;
        if (!(fields >> op)) continue;  // blank line
        if (op == "APPLY") {
            int id = -1;
            if (!(fields >> id))
                throw SemQLSyntaxError("APPLY needs a rule id", line_offset);
            out.push_back(ApplyRuleAction{id});
        } else if (op == "COL") {
            std::string qualified, source;
            if (!(fields >> qualified >> source))
                throw SemQLSyntaxError("COL needs <table>.<column> and a source",
                                       line_offset);
            std::size_t dot = qualified.find('.');
            if (dot == std::string::npos)
                throw SemQLSyntaxError("COL name must be <table>.<column>", line_offset);
            ColumnSource src;
            if (source == "schema") src = ColumnSource::schema;
            else if (source == "memory") src = ColumnSource::memory;
            else throw SemQLSyntaxError("COL source must be schema or memory", line_offset);
            out.push_back(SelectColumnAction{qualified.substr(dot + 1), src});
        } else if (op == "TAB") {
            std::string table;
            if (!(fields >> table))
                throw SemQLSyntaxError("TAB needs a table name", line_offset);
            out.push_back(SelectTableAction{table});
        } else {
            throw SemQLSyntaxError("unknown action '" + op + "'", line_offset);
        }
        std::string rest;
        if (fields >> rest)
            throw SemQLSyntaxError("trailing text '" + rest + "'", line_offset);
    }
    return out;
}

}  // namespace semql
