// Command-line surface for the SemQL pipeline: SQL <-> SemQL translation,
// join-aware lowering, schema linking, and corpus evaluation, exposed as
// subcommands for scripting and golden tests.
//
// Exit codes: 0 success, 1 domain error (diagnosed on stderr as
// `error[<ErrorName>]: <message>`), 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "semql/actions.hpp"
#include "semql/canonical.hpp"
#include "semql/errors.hpp"
#include "semql/knowledge.hpp"
#include "semql/lift.hpp"
#include "semql/link.hpp"
#include "semql/lower.hpp"
#include "semql/metrics.hpp"
#include "semql/schema.hpp"
#include "semql/semql_text.hpp"
#include "semql/semql_tree.hpp"
#include "semql/sql_parse.hpp"

namespace {

using namespace semql;

struct CliConfig {
    std::string schema_path;
    std::string knowledge = "off";
    std::string fixture_path;
    std::string cache_dir;
    std::string base_url;
    std::string format = "text";
    std::string star_table;

    bool json() const { return format == "json-lines"; }
};

int report(const char* name, const std::exception& e) {
    std::cerr << "error[" << name << "]: " << e.what() << "\n";
    return 1;
}

/// Runs a subcommand body, mapping every domain error to exit 1 with a
/// stable diagnostic naming the error type.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return report(e.name().c_str(), e);
    } catch (const std::exception& e) {
        return report("InternalError", e);
    }
}

/// Loads schemas from a JSON file, or from every .json file of a directory
/// in filename order.
std::vector<Schema> load_schemas(const std::string& path) {
    if (!std::filesystem::is_directory(path)) return load_schema_file(path);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Schema> schemas;
    for (const auto& file : files)
        for (Schema& schema : load_schema_file(file.string()))
            schemas.push_back(std::move(schema));
    return schemas;
}

const Schema& pick_schema(const std::vector<Schema>& schemas) {
    if (schemas.empty()) throw SchemaFormatError("schema file contains no schemas");
    return schemas.front();
}

const Schema& schema_named(const std::vector<Schema>& schemas, const std::string& name,
                           std::size_t line) {
    for (const Schema& schema : schemas)
        if (iequals(schema.name, name)) return schema;
    throw Error("Error", "pairs file line " + std::to_string(line) + ": unknown schema '" +
                name + "'");
}

std::unique_ptr<KnowledgeSource> make_source(const CliConfig& config) {
    if (config.knowledge == "fixture")
        return std::make_unique<FixtureKnowledgeSource>(config.fixture_path);
    if (config.knowledge == "http")
        return std::make_unique<HttpKnowledgeSource>(config.base_url, config.cache_dir);
    return nullptr;
}

LiftOptions lift_options(const CliConfig& config) {
    LiftOptions options;
    if (!config.star_table.empty()) options.star_table = config.star_table;
    return options;
}

std::string fixed3(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3f", value);
    return buffer;
}

std::string percent1(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.1f%%", value * 100.0);
    return buffer;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

int run_lift(const CliConfig& config, const std::string& sql) {
    std::vector<Schema> schemas = load_schemas(config.schema_path);
    const Schema& schema = pick_schema(schemas);
    SemQLTree tree = lift_query(parse_sql(sql, schema), schema, lift_options(config));
    std::string text = print_semql(tree);
    if (config.json())
        std::cout << nlohmann::json{{"semql", text}}.dump() << "\n";
    else
        std::cout << text << "\n";
    return 0;
}

int run_lower(const CliConfig& config, const std::string& semql_text) {
    std::vector<Schema> schemas = load_schemas(config.schema_path);
    const Schema& schema = pick_schema(schemas);
    SqlQuery query = lower_query(parse_semql(semql_text), schema);
    std::string text = print_sql(query);
    if (config.json())
        std::cout << nlohmann::json{{"sql", text}}.dump() << "\n";
    else
        std::cout << text << "\n";
    return 0;
}

int run_roundtrip(const CliConfig& config, const std::string& sql) {
    std::vector<Schema> schemas = load_schemas(config.schema_path);
    const Schema& schema = pick_schema(schemas);
    SqlQuery original = parse_sql(sql, schema);
    SemQLTree tree = lift_query(original, schema, lift_options(config));
    SqlQuery back = lower_query(tree, schema);
    bool match = exact_match(back, original);
    if (config.json()) {
        std::cout << nlohmann::json{{"match", match},
                                    {"input", print_sql(original)},
                                    {"output", print_sql(back)}}
                         .dump()
                  << "\n";
    } else if (match) {
        std::cout << print_sql(back) << "\n";
    } else {
        std::cout << "round trip mismatch\n in: " << print_sql(original)
                  << "\nout: " << print_sql(back) << "\n";
    }
    return match ? 0 : 1;
}

int run_link(const CliConfig& config, const std::string& question) {
    std::vector<Schema> schemas = load_schemas(config.schema_path);
    const Schema& schema = pick_schema(schemas);
    std::unique_ptr<KnowledgeSource> source = make_source(config);
    LinkResult result = link_question(question, schema, source.get());
    if (config.json()) {
        nlohmann::json spans = nlohmann::json::array();
        for (const Span& span : result.spans)
            spans.push_back({{"type", span_type_name(span.type)},
                             {"tokens", span.tokens},
                             {"begin", span.begin},
                             {"end", span.end}});
        nlohmann::json columns = nlohmann::json::object();
        for (const auto& [column, type] : result.column_types)
            columns[column] = column_link_name(type);
        std::cout << nlohmann::json{{"spans", spans},
                                    {"columns", columns},
                                    {"degraded", result.degraded},
                                    {"warning", result.warning}}
                         .dump()
                  << "\n";
        return 0;
    }
    std::cout << "spans:\n";
    for (const Span& span : result.spans)
        std::cout << "  " << span_type_name(span.type) << " [" << span.begin << ","
                  << span.end << "): " << join(span.tokens, " ") << "\n";
    std::cout << "columns:\n";
    for (const auto& [column, type] : result.column_types)
        std::cout << "  " << column << ": " << column_link_name(type) << "\n";
    if (result.degraded) std::cout << "warning: " << result.warning << "\n";
    return 0;
}

int run_actions(const CliConfig& config, const std::string& semql_text) {
    std::vector<Schema> schemas = load_schemas(config.schema_path);
    const Schema& schema = pick_schema(schemas);
    SemQLTree tree = parse_semql(semql_text);
    std::vector<Violation> violations = validate(tree, schema);
    if (!violations.empty()) {
        std::string message = violations.front().path + ": " + violations.front().message;
        if (violations.size() > 1)
            message += " (and " + std::to_string(violations.size() - 1) + " more)";
        throw SemQLValidationError(message);
    }
    std::string text = print_actions(to_actions(tree));
    if (config.json())
        std::cout << nlohmann::json{{"actions", split_lines(text)}}.dump() << "\n";
    else
        std::cout << text;
    return 0;
}

int run_eval(const CliConfig& config, const std::string& pairs_path) {
    std::vector<Schema> schemas = load_schemas(config.schema_path);
    std::ifstream in(pairs_path);
    if (!in) throw Error("Error", "cannot open pairs file '" + pairs_path + "'");

    std::size_t pairs = 0;
    std::size_t exact = 0;
    std::map<std::string, double> f1_sums;
    for (const std::string& name : component_names()) f1_sums[name] = 0.0;

    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::size_t first = line.find('\t');
        std::size_t second = first == std::string::npos ? first : line.find('\t', first + 1);
        if (second == std::string::npos || line.find('\t', second + 1) != std::string::npos)
            throw Error("Error", "pairs file line " + std::to_string(line_number) +
                        ": expected predicted SQL, gold SQL, and schema name "
                        "separated by tabs");
        std::string predicted_text = line.substr(0, first);
        std::string gold_text = line.substr(first + 1, second - first - 1);
        std::string schema_name = line.substr(second + 1);

        const Schema& schema = schema_named(schemas, schema_name, line_number);
        SqlQuery gold = parse_sql(gold_text, schema);

        MatchReport match;
        // An unparseable prediction scores zero instead of aborting the run.
        try {
            match = component_match(parse_sql(predicted_text, schema), gold);
        } catch (const Error&) {
            match.exact = false;
            for (const std::string& name : component_names())
                match.components[name] = ComponentScore{};
        }

        ++pairs;
        if (match.exact) ++exact;
        for (const std::string& name : component_names())
            f1_sums[name] += match.components.at(name).f1;

        if (config.json()) {
            nlohmann::json components = nlohmann::json::object();
            for (const std::string& name : component_names()) {
                const ComponentScore& score = match.components.at(name);
                components[name] = {{"precision", score.precision},
                                    {"recall", score.recall},
                                    {"f1", score.f1}};
            }
            std::cout << nlohmann::json{{"pair", pairs - 1},
                                        {"exact", match.exact},
                                        {"components", components}}
                             .dump()
                      << "\n";
        }
    }

    double denom = pairs == 0 ? 1.0 : static_cast<double>(pairs);
    double accuracy = static_cast<double>(exact) / denom;
    if (config.json()) {
        nlohmann::json means = nlohmann::json::object();
        for (const std::string& name : component_names())
            means[name] = f1_sums.at(name) / denom;
        std::cout << nlohmann::json{{"pairs", pairs},
                                    {"exact_accuracy", accuracy},
                                    {"mean_f1", means}}
                         .dump()
                  << "\n";
        return 0;
    }
    std::cout << "pairs: " << pairs << "\n";
    std::cout << "exact accuracy: " << fixed3(accuracy) << "\n";
    for (const std::string& name : component_names())
        std::cout << name << " F1: " << fixed3(f1_sums.at(name) / denom) << "\n";
    return 0;
}

/// Reads the db_id set of a Spider example file (train_spider.json or
/// dev.json); empty when the file is missing or not example-shaped.
std::set<std::string> split_ids(const std::filesystem::path& path) {
    std::set<std::string> ids;
    std::ifstream in(path);
    if (!in) return ids;
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception&) {
        return ids;
    }
    if (!doc.is_array()) return ids;
    for (const auto& entry : doc) {
        if (!entry.is_object()) continue;
        std::string id = entry.value("db_id", "");
        if (!id.empty()) ids.insert(to_lower(id));
    }
    return ids;
}

int run_stats(const CliConfig& config, std::string dir) {
    if (dir.empty()) {
        const char* env = std::getenv("SPIDER_DATA_DIR");
        if (env != nullptr) dir = env;
    }
    if (dir.empty())
        throw Error("Error", "no schema directory given and SPIDER_DATA_DIR is not set");
    if (!std::filesystem::is_directory(dir))
        throw Error("Error", "'" + dir + "' is not a directory");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<Schema> schemas;
    for (const auto& file : files) {
        try {
            for (Schema& schema : load_schema_file(file.string()))
                schemas.push_back(std::move(schema));
        } catch (const Error&) {
            std::cerr << "note: skipped " << file.filename().string()
                      << " (not a schema collection)\n";
        }
    }

    CorpusStats stats = duplicate_column_stats(schemas);

    // OOV needs a train/dev partition of the schemas, recovered from the
    // example files naming each split's databases.
    std::filesystem::path base(dir);
    std::set<std::string> train_ids = split_ids(base / "train_spider.json");
    if (train_ids.empty()) train_ids = split_ids(base / "train.json");
    std::set<std::string> dev_ids = split_ids(base / "dev.json");
    std::optional<double> oov;
    if (!train_ids.empty() && !dev_ids.empty()) {
        std::vector<Schema> train, dev;
        for (const Schema& schema : schemas) {
            std::string name = to_lower(schema.name);
            if (train_ids.count(name)) train.push_back(schema);
            if (dev_ids.count(name)) dev.push_back(schema);
        }
        oov = oov_rate(train, dev);
        stats.oov_rate = *oov;
    }

    if (config.json()) {
        nlohmann::json out{
            {"schemas", schemas.size()},
            {"schemas_with_duplicate_columns", stats.schemas_with_duplicate_columns},
            {"mean_duplicate_column_fraction", stats.mean_duplicate_column_fraction}};
        if (oov.has_value()) out["oov_rate"] = *oov;
        std::cout << out.dump() << "\n";
        return 0;
    }
    std::cout << "schemas: " << schemas.size() << "\n";
    std::cout << "schemas with duplicate columns: "
              << percent1(stats.schemas_with_duplicate_columns) << "\n";
    std::cout << "mean duplicate column fraction: "
              << percent1(stats.mean_duplicate_column_fraction) << "\n";
    if (oov.has_value())
        std::cout << "oov rate (dev vs train): " << percent1(*oov) << "\n";
    return 0;
}

int usage_error(const std::string& message) {
    std::cerr << "usage error: " << message << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CliConfig config;
    std::string sql_arg, semql_arg, question_arg, pairs_arg, stats_dir;

    CLI::App app{"SemQL pipeline tools: SQL <-> SemQL translation, schema linking, "
                 "and evaluation"};
    app.require_subcommand(1);
    app.add_option("--schema", config.schema_path,
                   "Schema JSON file or directory; single-query commands use the "
                   "first schema listed");
    app.add_option("--knowledge", config.knowledge,
                   "Knowledge source for value linking")
        ->check(CLI::IsMember({"fixture", "http", "off"}))
        ->capture_default_str();
    app.add_option("--fixture", config.fixture_path,
                   "Knowledge TSV file for --knowledge fixture");
    app.add_option("--cache", config.cache_dir, "HTTP response cache directory");
    app.add_option("--base-url", config.base_url,
                   "Knowledge service base URL for --knowledge http");
    app.add_option("--format", config.format, "Output format")
        ->check(CLI::IsMember({"text", "json-lines"}))
        ->capture_default_str();
    app.add_option("--star-table", config.star_table,
                   "Table assigned to '*' when the FROM clause leaves it ambiguous");

    CLI::App* lift_cmd = app.add_subcommand("lift", "Translate a SQL query into SemQL");
    lift_cmd->add_option("sql", sql_arg, "SQL query")->required();

    CLI::App* lower_cmd =
        app.add_subcommand("lower", "Translate a SemQL tree into SQL");
    lower_cmd->add_option("semql", semql_arg, "SemQL tree")->required();

    CLI::App* roundtrip_cmd = app.add_subcommand(
        "roundtrip", "Lift and lower a SQL query; succeeds iff the result "
                     "matches the input under canonical comparison");
    roundtrip_cmd->add_option("sql", sql_arg, "SQL query")->required();

    CLI::App* link_cmd =
        app.add_subcommand("link", "Link a natural-language question to the schema");
    link_cmd->add_option("question", question_arg, "Question text")->required();

    CLI::App* actions_cmd = app.add_subcommand(
        "actions", "Print the decoder action sequence deriving a SemQL tree");
    actions_cmd->add_option("semql", semql_arg, "SemQL tree")->required();

    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "Score tab-separated (predicted, gold, schema) query pairs");
    eval_cmd->add_option("pairs", pairs_arg, "Pairs file")->required();

    CLI::App* stats_cmd = app.add_subcommand(
        "stats", "Report duplicate-column and OOV statistics over a schema directory");
    stats_cmd->add_option("dir", stats_dir,
                          "Directory of schema .json files (default: SPIDER_DATA_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (config.knowledge == "http" && config.base_url.empty())
        return usage_error("--knowledge http requires --base-url");
    if (config.knowledge == "fixture" && config.fixture_path.empty())
        return usage_error("--knowledge fixture requires --fixture");
    if (!stats_cmd->parsed() && config.schema_path.empty())
        return usage_error("--schema is required for this command");

    if (lift_cmd->parsed()) return guarded([&] { return run_lift(config, sql_arg); });
    if (lower_cmd->parsed())
        return guarded([&] { return run_lower(config, semql_arg); });
    if (roundtrip_cmd->parsed())
        return guarded([&] { return run_roundtrip(config, sql_arg); });
    if (link_cmd->parsed())
        return guarded([&] { return run_link(config, question_arg); });
    if (actions_cmd->parsed())
        return guarded([&] { return run_actions(config, semql_arg); });
    if (eval_cmd->parsed()) return guarded([&] { return run_eval(config, pairs_arg); });
    if (stats_cmd->parsed())
        return guarded([&] { return run_stats(config, stats_dir); });
    return 2;
}
