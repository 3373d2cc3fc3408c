#pragma once

// Relational schema model: tables, columns, foreign keys, the undirected
// FK multigraph over tables, and minimal join path search on it.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "semql/errors.hpp"
#include "semql/util.hpp"

namespace semql {

struct Column {
    std::string original_name;
    std::vector<std::string> tokens;  // lower-cased name parts

    friend bool operator==(const Column&, const Column&) = default;
};

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::optional<std::size_t> primary_key;  // index into columns

    const Column* find_column(std::string_view column_name) const {
        for (const Column& c : columns)
            if (iequals(c.original_name, column_name)) return &c;
        return nullptr;
    }

    friend bool operator==(const Table&, const Table&) = default;
};

/// Fully qualified column reference; names use the schema's spelling.
struct ColumnRef {
    std::string table;
    std::string column;

    friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct ForeignKey {
    ColumnRef from;
    ColumnRef to;

    friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

struct Schema {
    std::string name;
    std::vector<Table> tables;
    std::vector<ForeignKey> foreign_keys;

    const Table* find_table(std::string_view table_name) const {
        for (const Table& t : tables)
            if (iequals(t.name, table_name)) return &t;
        return nullptr;
    }

    std::size_t table_index(std::string_view table_name) const {
        for (std::size_t i = 0; i < tables.size(); ++i)
            if (iequals(tables[i].name, table_name)) return i;
        return static_cast<std::size_t>(-1);
    }

    friend bool operator==(const Schema&, const Schema&) = default;
};

/// True when every foreign key points at its target table's primary key.
inline bool is_complete(const Schema& schema) {
    for (const ForeignKey& fk : schema.foreign_keys) {
        const Table* target = schema.find_table(fk.to.table);
        if (target == nullptr || !target->primary_key.has_value()) return false;
        const Column& pk = target->columns[*target->primary_key];
        if (!iequals(pk.original_name, fk.to.column)) return false;
    }
    return true;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> locate_column(
    const std::vector<std::pair<long, std::string>>& columns,
    long index, const std::string& role) {
    if (index < 0 || static_cast<std::size_t>(index) >= columns.size())
        throw SchemaFormatError(role + " column index " + std::to_string(index) +
                                " out of range");
    const auto& [table, name] = columns[static_cast<std::size_t>(index)];
    if (table < 0)
        throw SchemaFormatError(role + " column index " + std::to_string(index) +
                                " refers to '*'");
    return {static_cast<std::size_t>(table), static_cast<std::size_t>(index)};
}

}  // namespace detail

/// Loads one schema from a Spider tables.json entry.
inline Schema load_spider_schema(const nlohmann::json& entry) {
    try {
        Schema schema;
        schema.name = entry.value("db_id", std::string("schema"));

        const auto& table_names = entry.at("table_names_original");
        for (const auto& name : table_names) {
            Table table;
            table.name = name.get<std::string>();
            if (table.name.empty())
                throw SchemaFormatError("empty table name in schema '" + schema.name + "'");
            for (const Table& existing : schema.tables)
                if (iequals(existing.name, table.name))
                    throw SchemaFormatError("duplicate table name '" + table.name +
                                            "' in schema '" + schema.name + "'");
            schema.tables.push_back(std::move(table));
        }

        // Global column list, including the '*' entry, in file order. Local
        // column positions are needed to resolve primary/foreign key indices.
        std::vector<std::pair<long, std::string>> columns;
        std::vector<std::size_t> local_index;
        for (const auto& pair : entry.at("column_names_original")) {
            long table_index = pair.at(0).get<long>();
            std::string column_name = pair.at(1).get<std::string>();
            std::size_t local = 0;
            if (table_index >= 0) {
                if (static_cast<std::size_t>(table_index) >= schema.tables.size())
                    throw SchemaFormatError("column '" + column_name +
                                            "' names table index " +
                                            std::to_string(table_index) + " out of range");
                if (column_name.empty())
                    throw SchemaFormatError("empty column name in schema '" + schema.name + "'");
                Table& table = schema.tables[static_cast<std::size_t>(table_index)];
                if (table.find_column(column_name) != nullptr)
                    throw SchemaFormatError("duplicate column '" + column_name +
                                            "' in table '" + table.name + "'");
                local = table.columns.size();
                table.columns.push_back(Column{column_name, tokenize_name(column_name)});
            }
            columns.emplace_back(table_index, std::move(column_name));
            local_index.push_back(local);
        }

        if (entry.contains("primary_keys")) {
            for (const auto& pk : entry.at("primary_keys")) {
                auto [table, global] = detail::locate_column(columns, pk.get<long>(),
                                                             "primary key");
                // Spider lists composite keys as repeated entries; the model
                // keeps one key per table, so the first listed wins.
                if (!schema.tables[table].primary_key.has_value())
                    schema.tables[table].primary_key = local_index[global];
            }
        }

        if (entry.contains("foreign_keys")) {
            for (const auto& fk : entry.at("foreign_keys")) {
                auto [from_table, from_global] =
                    detail::locate_column(columns, fk.at(0).get<long>(), "foreign key");
                auto [to_table, to_global] =
                    detail::locate_column(columns, fk.at(1).get<long>(), "foreign key");
                schema.foreign_keys.push_back(ForeignKey{
                    ColumnRef{schema.tables[from_table].name, columns[from_global].second},
                    ColumnRef{schema.tables[to_table].name, columns[to_global].second}});
            }
        }

        return schema;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaFormatError(std::string("malformed schema document: ") + e.what());
    }
}

/// Loads every schema from a Spider tables.json document (a list of entries).
inline std::vector<Schema> load_spider_schemas(const nlohmann::json& doc) {
    if (!doc.is_array())
        throw SchemaFormatError("schema document must be a list of schema entries");
    std::vector<Schema> schemas;
    for (const auto& entry : doc) schemas.push_back(load_spider_schema(entry));
    return schemas;
}

inline std::vector<Schema> load_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaFormatError("cannot open schema file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaFormatError("invalid JSON in '" + path + "': " + e.what());
    }
    return load_spider_schemas(doc);
}

/// One undirected edge of the schema graph; a and b index vertices, fk is
/// the index of the foreign key that induced the edge. Parallel edges are
/// kept, one per foreign key.
struct SchemaEdge {
    std::size_t a;
    std::size_t b;
    std::size_t fk;

    friend bool operator==(const SchemaEdge&, const SchemaEdge&) = default;
};

struct SchemaGraph {
    std::vector<std::string> vertices;  // table names, schema order
    std::vector<SchemaEdge> edges;      // foreign key order

    std::size_t vertex_index(std::string_view table) const {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (iequals(vertices[i], table)) return i;
        return static_cast<std::size_t>(-1);
    }

    friend bool operator==(const SchemaGraph&, const SchemaGraph&) = default;
};

inline SchemaGraph build_schema_graph(const Schema& schema) {
    SchemaGraph graph;
    for (const Table& t : schema.tables) graph.vertices.push_back(t.name);
    for (std::size_t i = 0; i < schema.foreign_keys.size(); ++i) {
        const ForeignKey& fk = schema.foreign_keys[i];
        std::size_t a = schema.table_index(fk.from.table);
        std::size_t b = schema.table_index(fk.to.table);
        if (a == static_cast<std::size_t>(-1) || b == static_cast<std::size_t>(-1))
            throw SchemaFormatError("foreign key references unknown table");
        if (a == b) continue;  // a self-referential key adds no join edge
        graph.edges.push_back(SchemaEdge{a, b, i});
    }
    return graph;
}

/// One step of a join order: the table to bring in and, except for the first
/// step, the foreign key joining it to an earlier step.
struct JoinStep {
    std::string table;
    std::optional<std::size_t> fk;

    friend bool operator==(const JoinStep&, const JoinStep&) = default;
};

namespace detail {

inline bool induced_connected(const SchemaGraph& graph, const std::vector<bool>& in_set,
                              std::size_t count) {
    std::size_t start = static_cast<std::size_t>(-1);
    for (std::size_t v = 0; v < in_set.size(); ++v)
        if (in_set[v]) { start = v; break; }
    if (start == static_cast<std::size_t>(-1)) return false;
    std::vector<bool> seen(in_set.size(), false);
    std::vector<std::size_t> queue{start};
    seen[start] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
        std::size_t v = queue.back();
        queue.pop_back();
        for (const SchemaEdge& e : graph.edges) {
            if (!in_set[e.a] || !in_set[e.b]) continue;
            std::size_t other;
            if (e.a == v) other = e.b;
            else if (e.b == v) other = e.a;
            else continue;
            if (!seen[other]) {
                seen[other] = true;
                ++reached;
                queue.push_back(other);
            }
        }
    }
    return reached == count;
}

/// Linearizes a connected vertex set into join steps, starting from the
/// lowest-indexed required vertex and always crossing the frontier over the
/// smallest foreign key id, which yields the lexicographically smallest
/// label sequence for the chosen tree.
inline std::vector<JoinStep> linearize(const SchemaGraph& graph, const std::vector<bool>& in_set,
                                       std::size_t count, std::size_t start) {
    std::vector<JoinStep> steps{JoinStep{graph.vertices[start], std::nullopt}};
    std::vector<bool> visited(in_set.size(), false);
    visited[start] = true;
    std::size_t placed = 1;
    while (placed < count) {
        bool advanced = false;
        for (const SchemaEdge& e : graph.edges) {  // edge order == fk id order
            if (!in_set[e.a] || !in_set[e.b]) continue;
            if (visited[e.a] == visited[e.b]) continue;
            std::size_t next = visited[e.a] ? e.b : e.a;
            steps.push_back(JoinStep{graph.vertices[next], e.fk});
            visited[next] = true;
            ++placed;
            advanced = true;
            break;
        }
        if (!advanced) break;  // unreachable for a connected set
    }
    return steps;
}

/// Advances pick to the next k-combination of {0..n-1}; false when done.
inline bool next_combination(std::vector<std::size_t>& pick, std::size_t n) {
    std::size_t k = pick.size();
    for (std::size_t i = k; i-- > 0;) {
        if (pick[i] != i + n - k) {
            ++pick[i];
            for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Finds a minimal connected subgraph covering the required tables and
/// returns it as a join order. Minimality is exact: vertex supersets of the
/// required set are tried in increasing size, so the result uses as few
/// joins as any connected cover. Throws NoJoinPathError when the required
/// tables span disconnected components.
inline std::vector<JoinStep> join_path(const SchemaGraph& graph,
                                       const std::vector<std::string>& required) {
    if (required.empty())
        throw std::invalid_argument("join_path requires at least one table");

    std::vector<std::size_t> req;
    for (const std::string& name : required) {
        std::size_t v = graph.vertex_index(name);
        if (v == static_cast<std::size_t>(-1))
            throw std::invalid_argument("join_path: unknown table '" + name + "'");
        if (std::find(req.begin(), req.end(), v) == req.end()) req.push_back(v);
    }
    std::sort(req.begin(), req.end());

    if (req.size() == 1) return {JoinStep{graph.vertices[req[0]], std::nullopt}};

    // Reachability check first so disconnection is reported, not searched for.
    {
        std::vector<bool> all(graph.vertices.size(), true);
        std::vector<bool> seen(graph.vertices.size(), false);
        std::vector<std::size_t> queue{req[0]};
        seen[req[0]] = true;
        while (!queue.empty()) {
            std::size_t v = queue.back();
            queue.pop_back();
            for (const SchemaEdge& e : graph.edges) {
                std::size_t other;
                if (e.a == v) other = e.b;
                else if (e.b == v) other = e.a;
                else continue;
                if (!seen[other]) {
                    seen[other] = true;
                    queue.push_back(other);
                }
            }
        }
        for (std::size_t v : req) {
            if (!seen[v]) {
                std::string names;
                for (std::size_t r : req) {
                    if (!names.empty()) names += ", ";
                    names += graph.vertices[r];
                }
                throw NoJoinPathError("no join path connects tables: " + names);
            }
        }
        // Only vertices in the required component can help.
        std::vector<std::size_t> extras;
        for (std::size_t v = 0; v < graph.vertices.size(); ++v)
            if (seen[v] && std::find(req.begin(), req.end(), v) == req.end())
                extras.push_back(v);

        std::vector<bool> base(graph.vertices.size(), false);
        for (std::size_t v : req) base[v] = true;

        for (std::size_t k = 0; k <= extras.size(); ++k) {
            // k-combinations of extras in lexicographic index order, so ties
            // in subgraph size resolve deterministically.
            std::vector<std::size_t> pick(k);
            for (std::size_t i = 0; i < k; ++i) pick[i] = i;
            do {
                std::vector<bool> in_set = base;
                for (std::size_t i : pick) in_set[extras[i]] = true;
                if (detail::induced_connected(graph, in_set, req.size() + k))
                    return detail::linearize(graph, in_set, req.size() + k, req[0]);
            } while (detail::next_combination(pick, extras.size()));
        }
    }
    throw NoJoinPathError("no join path found");  // not reachable after the BFS check
}

}  // namespace semql
