#pragma once

// Evaluation metrics: per-component precision/recall/F1 between canonical
// forms, exact-match accuracy, and corpus statistics (out-of-vocabulary
// rate, duplicated column names across tables).

#include <map>
#include <set>
#include <string>
#include <vector>

#include "semql/canonical.hpp"
#include "semql/schema.hpp"
#include "semql/sql.hpp"
#include "semql/util.hpp"

namespace semql {

struct ComponentScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const ComponentScore&, const ComponentScore&) = default;
};

struct MatchReport {
    bool exact = false;
    std::map<std::string, ComponentScore> components;
};

namespace detail {

inline ComponentScore set_f1(const std::vector<std::string>& predicted,
                             const std::vector<std::string>& gold) {
    if (predicted.empty() && gold.empty()) return ComponentScore{1.0, 1.0, 1.0};
    std::size_t overlap = 0;
    for (const std::string& item : predicted)
        for (const std::string& g : gold)
            if (item == g) {
                ++overlap;
                break;
            }
    ComponentScore score;
    score.precision = predicted.empty() ? 0.0
                                        : static_cast<double>(overlap) /
                                              static_cast<double>(predicted.size());
    score.recall = gold.empty() ? 0.0
                                : static_cast<double>(overlap) /
                                      static_cast<double>(gold.size());
    score.f1 = (score.precision + score.recall) > 0.0
                   ? 2.0 * score.precision * score.recall /
                         (score.precision + score.recall)
                   : 0.0;
    return score;
}

}  // namespace detail

inline const std::vector<std::string>& component_names() {
    static const std::vector<std::string> names = {
        "select", "where", "group_by", "having", "order_by", "from", "keywords"};
    return names;
}

/// Scores each clause component of predicted against gold. The set-op right
/// side is folded into the keywords/serialized comparison, so exact match
/// implies F1 1.0 on every component.
inline MatchReport component_match(const SqlQuery& predicted, const SqlQuery& gold) {
    CanonicalForm p = canonicalize(predicted);
    CanonicalForm g = canonicalize(gold);
    MatchReport report;
    report.exact = (p == g);
    report.components["select"] = detail::set_f1(p.select_set, g.select_set);
    report.components["where"] = detail::set_f1(p.where_set, g.where_set);
    report.components["group_by"] = detail::set_f1(p.group_set, g.group_set);
    report.components["having"] = detail::set_f1(p.having_set, g.having_set);
    report.components["order_by"] = detail::set_f1(p.order_set, g.order_set);
    report.components["from"] = detail::set_f1(p.from_set, g.from_set);
    // The right operand of a set operation participates via the keyword set:
    // compare the serialized right sides as one-element sets.
    std::vector<std::string> p_kw = p.keyword_set;
    std::vector<std::string> g_kw = g.keyword_set;
    if (!p.set_op_right.empty()) p_kw.push_back("right:" + p.set_op_right);
    if (!g.set_op_right.empty()) g_kw.push_back("right:" + g.set_op_right);
    report.components["keywords"] = detail::set_f1(p_kw, g_kw);
    return report;
}

/// Fraction of distinct schema-name words in eval_schemas that never occur
/// in train_schemas' table or column names. Empty eval vocabulary -> 0.
inline double oov_rate(const std::vector<Schema>& train_schemas,
                       const std::vector<Schema>& eval_schemas) {
    std::set<std::string> train_vocab;
    for (const Schema& schema : train_schemas) {
        for (const Table& table : schema.tables) {
            for (const std::string& word : tokenize_name(table.name))
                train_vocab.insert(word);
            for (const Column& column : table.columns)
                for (const std::string& word : column.tokens) train_vocab.insert(word);
        }
    }
    std::set<std::string> eval_vocab;
    for (const Schema& schema : eval_schemas) {
        for (const Table& table : schema.tables) {
            for (const std::string& word : tokenize_name(table.name))
                eval_vocab.insert(word);
            for (const Column& column : table.columns)
                for (const std::string& word : column.tokens) eval_vocab.insert(word);
        }
    }
    if (eval_vocab.empty()) return 0.0;
    std::size_t unseen = 0;
    for (const std::string& word : eval_vocab)
        if (train_vocab.find(word) == train_vocab.end()) ++unseen;
    return static_cast<double>(unseen) / static_cast<double>(eval_vocab.size());
}

struct CorpusStats {
    double oov_rate = 0.0;
    double schemas_with_duplicate_columns = 0.0;  // fraction of schemas
    double mean_duplicate_column_fraction = 0.0;  // mean over schemas

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// A column instance counts as duplicated when its (lower-cased) name also
/// appears in another table of the same schema.
inline CorpusStats duplicate_column_stats(const std::vector<Schema>& schemas) {
    CorpusStats stats;
    if (schemas.empty()) return stats;
    std::size_t with_duplicates = 0;
    double fraction_sum = 0.0;
    for (const Schema& schema : schemas) {
        std::map<std::string, std::size_t> table_count;
        for (const Table& table : schema.tables) {
            std::set<std::string> names;
            for (const Column& column : table.columns)
                names.insert(to_lower(column.original_name));
            for (const std::string& name : names) ++table_count[name];
        }
        std::size_t total = 0;
        std::size_t duplicated = 0;
        for (const Table& table : schema.tables) {
            for (const Column& column : table.columns) {
                ++total;
                if (table_count[to_lower(column.original_name)] >= 2) ++duplicated;
            }
        }
        double fraction = total == 0 ? 0.0
                                     : static_cast<double>(duplicated) /
                                           static_cast<double>(total);
        fraction_sum += fraction;
        if (duplicated > 0) ++with_duplicates;
    }
    stats.schemas_with_duplicate_columns =
        static_cast<double>(with_duplicates) / static_cast<double>(schemas.size());
    stats.mean_duplicate_column_fraction =
        fraction_sum / static_cast<double>(schemas.size());
    return stats;
}

}  // namespace semql
