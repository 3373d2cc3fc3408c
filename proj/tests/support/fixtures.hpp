#pragma once

// Test helpers: fixture loading and deterministic random generators for
// schemas and trees.

#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "semql/actions.hpp"
#include "semql/schema.hpp"
#include "semql/semql_tree.hpp"

namespace semql::testing {

inline std::string fixture_path(const std::string& name) {
    return std::string(SEMQL_FIXTURE_DIR) + "/" + name;
}

inline Schema load_fixture(const std::string& name) {
    return load_schema_file(fixture_path(name)).front();
}

/// Golden corpus entries: (schema, sql), one per line of golden_corpus.tsv.
/// Schemas are cached so the pointers stay valid for the process lifetime.
inline std::vector<std::pair<const Schema*, std::string>> load_corpus() {
    static std::map<std::string, Schema> schemas;
    std::vector<std::pair<const Schema*, std::string>> corpus;
    std::ifstream in(fixture_path("golden_corpus.tsv"));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        std::string id = line.substr(0, tab);
        std::string sql = line.substr(tab + 1);
        auto it = schemas.find(id);
        if (it == schemas.end())
            it = schemas.emplace(id, load_fixture(id + ".json")).first;
        corpus.emplace_back(&it->second, std::move(sql));
    }
    return corpus;
}

/// Random schema: up to max_tables tables t0..tN, each with a primary key
/// id<i> and a name column, plus random foreign keys (parallel edges
/// allowed). Tables may stay disconnected.
inline Schema random_schema(std::mt19937& rng, std::size_t max_tables = 8) {
    Schema schema;
    schema.name = "random";
    std::uniform_int_distribution<std::size_t> table_count(1, max_tables);
    std::size_t n = table_count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        Table table;
        table.name = "t" + std::to_string(i);
        std::string key = "id" + std::to_string(i);
        table.columns.push_back(Column{key, tokenize_name(key)});
        table.columns.push_back(Column{"name" + std::to_string(i),
                                       tokenize_name("name" + std::to_string(i))});
        table.primary_key = 0;
        schema.tables.push_back(std::move(table));
    }
    if (n > 1) {
        std::uniform_int_distribution<std::size_t> fk_count(0, 2 * n);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::size_t fks = fk_count(rng);
        for (std::size_t k = 0; k < fks; ++k) {
            std::size_t from = pick(rng);
            std::size_t to = pick(rng);
            if (from == to) continue;
            std::string ref = "ref" + std::to_string(schema.foreign_keys.size());
            schema.tables[from].columns.push_back(Column{ref, tokenize_name(ref)});
            schema.foreign_keys.push_back(
                ForeignKey{ColumnRef{schema.tables[from].name, ref},
                           ColumnRef{schema.tables[to].name, "id" + std::to_string(to)}});
        }
    }
    return schema;
}

/// Independent minimal-connection oracle: smallest number of edges whose
/// union connects all required vertices, found by brute force over edge
/// subsets. Returns -1 when no subset connects them.
inline int min_connecting_edges(const SchemaGraph& graph,
                                const std::vector<std::string>& required) {
    std::vector<std::size_t> req;
    for (const std::string& name : required) {
        std::size_t v = graph.vertex_index(name);
        bool seen = false;
        for (std::size_t r : req)
            if (r == v) seen = true;
        if (!seen) req.push_back(v);
    }
    if (req.size() <= 1) return 0;
    std::size_t m = graph.edges.size();
    for (std::size_t k = 0; k <= m; ++k) {
        // all k-subsets of edges via bitmask-free combinations
        std::vector<std::size_t> pick(k);
        for (std::size_t i = 0; i < k; ++i) pick[i] = i;
        while (true) {
            // union-find over chosen edges
            std::vector<std::size_t> parent(graph.vertices.size());
            for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
            std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
                while (parent[x] != x) x = parent[x] = parent[parent[x]];
                return x;
            };
            for (std::size_t i : pick) {
                const SchemaEdge& e = graph.edges[i];
                parent[find(e.a)] = find(e.b);
            }
            bool connected = true;
            for (std::size_t r : req)
                if (find(r) != find(req[0])) connected = false;
            if (connected) return static_cast<int>(k);
            // next combination
            std::size_t i = k;
            bool advanced = false;
            while (i-- > 0) {
                if (pick[i] != i + m - k) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) break;
        }
    }
    return -1;
}

/// Random valid SemQL tree over the schema. Every production can appear;
/// literal payloads are left empty and limits default to 1, so these trees
/// are exactly the action-representable subset.
class TreeGenerator {
public:
    TreeGenerator(std::mt19937& rng, const Schema& schema) : rng_(rng), schema_(schema) {}

    SemQLTree tree() {
        SemQLTree t;
        std::uniform_int_distribution<int> kind(0, 7);
        int k = kind(rng_);
        if (k == 0) t.root.kind = ZKind::intersect;
        else if (k == 1) t.root.kind = ZKind::union_;
        else if (k == 2) t.root.kind = ZKind::except_;
        else t.root.kind = ZKind::single;
        t.root.left = r_node(2);
        if (t.root.kind != ZKind::single) t.root.right = r_node(2);
        return t;
    }

private:
    std::mt19937& rng_;
    const Schema& schema_;

    int pick(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(rng_);
    }

    ANode a_node() {
        ANode a;
        a.agg = static_cast<AggOp>(pick(0, 5));
        const Table& table = schema_.tables[static_cast<std::size_t>(
            pick(0, static_cast<int>(schema_.tables.size()) - 1))];
        a.table.table = table.name;
        int column = pick(0, static_cast<int>(table.columns.size()));
        if (column == static_cast<int>(table.columns.size())) {
            a.column.column = "*";
        } else {
            a.column.column = table.columns[static_cast<std::size_t>(column)].original_name;
        }
        return a;
    }

    FilterNode filter_node(int depth) {
        FilterNode f;
        int choice = depth > 0 ? pick(0, 3) : pick(2, 3);
        if (choice == 0) {
            f.node = AndFilter{box<FilterNode>(filter_node(depth - 1)),
                               box<FilterNode>(filter_node(depth - 1))};
        } else if (choice == 1) {
            f.node = OrFilter{box<FilterNode>(filter_node(depth - 1)),
                              box<FilterNode>(filter_node(depth - 1))};
        } else if (choice == 2) {
            f.node = CmpFilter{static_cast<CmpOp>(pick(0, 10)), a_node(), {}};
        } else {
            f.node = SubqueryFilter{static_cast<CmpOp>(pick(0, 10)), a_node(),
                                    box<RNode>(r_node(depth - 1))};
        }
        return f;
    }

    RNode r_node(int depth) {
        RNode r;
        int arity = pick(1, 5);
        for (int i = 0; i < arity; ++i) r.select.items.push_back(a_node());
        int shape = pick(0, 5);
        if (depth <= 0 && (shape == 1 || shape == 4 || shape == 5)) shape = 0;
        if (shape == 1 || shape == 4 || shape == 5) r.filter = filter_node(depth);
        if (shape == 2 || shape == 4)
            r.order = OrderNode{pick(0, 1) == 0 ? OrderDir::asc : OrderDir::desc, a_node()};
        if (shape == 3 || shape == 5)
            r.superlative = SuperlativeNode{
                pick(0, 1) == 0 ? OrderDir::asc : OrderDir::desc, 1, a_node()};
        return r;
    }
};

}  // namespace semql::testing
