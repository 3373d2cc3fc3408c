#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "semql/actions.hpp"
#include "semql/canonical.hpp"
#include "semql/semql_text.hpp"
#include "semql/sql_parse.hpp"
#include "support/fixtures.hpp"

using namespace semql;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

std::string shell_quote(const std::string& arg) {
    std::string out = "'";
    for (char c : arg) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out += "'";
    return out;
}

/// Runs the CLI binary with the given arguments, capturing stdout; stderr is
/// merged in when merge_stderr is set, discarded otherwise.
RunResult run_cli(const std::vector<std::string>& args, bool merge_stderr = true,
                  const std::string& env_prefix = "") {
    std::string command = env_prefix + std::string(SEMQL_CLI_PATH);
    for (const std::string& arg : args) command += " " + shell_quote(arg);
    command += merge_stderr ? " 2>&1" : " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buffer[4096];
    while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) result.output += buffer;
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string strip_newline(std::string text) {
    while (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

std::filesystem::path scratch_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("lift prints the SemQL tree for a query", "[cli]") {
    RunResult run = run_cli({"--schema", testing::fixture_path("social_db.json"),
                             "lift", "SELECT name FROM student"});
    CHECK(run.exit_code == 0);
    CHECK(run.output == "(Z (R (Select (A none (C name) (T student)))))\n");
}

TEST_CASE("lower prints the reconstructed SQL", "[cli]") {
    RunResult run = run_cli({"--schema", testing::fixture_path("concert_db.json"),
                             "lower", "(Z (R (Select (A none (C name) (T orchestra)))))"});
    CHECK(run.exit_code == 0);
    CHECK(run.output == "SELECT orchestra.name FROM orchestra\n");
}

TEST_CASE("roundtrip succeeds on a supported query", "[cli]") {
    RunResult run = run_cli({"--schema", testing::fixture_path("concert_db.json"),
                             "roundtrip", "SELECT name FROM orchestra"});
    CHECK(run.exit_code == 0);
    CHECK(run.output == "SELECT orchestra.name FROM orchestra\n");
}

TEST_CASE("lift and lower compose to the roundtrip verdict", "[cli]") {
    std::string schema_path = testing::fixture_path("social_db.json");
    std::string sql =
        "SELECT student.name FROM student JOIN friend ON student.student_id = "
        "friend.student_id GROUP BY student.name HAVING count(*) >= 2";

    RunResult lifted = run_cli({"--schema", schema_path, "lift", sql}, false);
    REQUIRE(lifted.exit_code == 0);
    RunResult lowered =
        run_cli({"--schema", schema_path, "lower", strip_newline(lifted.output)}, false);
    REQUIRE(lowered.exit_code == 0);

    Schema social = testing::load_fixture("social_db.json");
    bool composed_match = exact_match(parse_sql(strip_newline(lowered.output), social),
                                      parse_sql(sql, social));
    RunResult roundtrip = run_cli({"--schema", schema_path, "roundtrip", sql}, false);
    CHECK(composed_match == (roundtrip.exit_code == 0));
    CHECK(composed_match);
}

TEST_CASE("actions prints the derivation the library computes", "[cli]") {
    std::string tree_text = "(Z (R (Select (A none (C name) (T student)))))";
    RunResult run = run_cli({"--schema", testing::fixture_path("social_db.json"),
                             "actions", tree_text});
    CHECK(run.exit_code == 0);
    CHECK(run.output == print_actions(to_actions(parse_semql(tree_text))));
}

TEST_CASE("domain errors exit 1 with a typed diagnostic", "[cli]") {
    SECTION("unresolvable column") {
        RunResult run = run_cli({"--schema", testing::fixture_path("social_db.json"),
                                 "lift", "SELECT salary FROM student"});
        CHECK(run.exit_code == 1);
        CHECK_THAT(run.output, StartsWith("error[ResolutionError]:"));
    }
    SECTION("no join path between disconnected tables") {
        RunResult run = run_cli(
            {"--schema", testing::fixture_path("disco_db.json"), "lower",
             "(Z (R (Select (A none (C name) (T gallery)) (A none (C name) (T visitor)))))"});
        CHECK(run.exit_code == 1);
        CHECK_THAT(run.output, StartsWith("error[NoJoinPathError]:"));
    }
    SECTION("broken SemQL text") {
        RunResult run = run_cli({"--schema", testing::fixture_path("social_db.json"),
                                 "lower", "(Z"});
        CHECK(run.exit_code == 1);
        CHECK_THAT(run.output, StartsWith("error[SemQLSyntaxError]:"));
    }
    SECTION("invalid tree reported before lowering") {
        RunResult run = run_cli({"--schema", testing::fixture_path("social_db.json"),
                                 "actions", "(Z (R (Select (A none (C salary) (T student)))))"});
        CHECK(run.exit_code == 1);
        CHECK_THAT(run.output, StartsWith("error[SemQLValidationError]:"));
    }
}

TEST_CASE("usage errors exit 2", "[cli]") {
    std::string schema_path = testing::fixture_path("social_db.json");
    CHECK(run_cli({}).exit_code == 2);
    CHECK(run_cli({"frobnicate"}).exit_code == 2);
    CHECK(run_cli({"lift", "SELECT name FROM student"}).exit_code == 2);
    CHECK(run_cli({"--schema", schema_path, "--knowledge", "bogus", "link", "q"})
              .exit_code == 2);
    CHECK(run_cli({"--schema", schema_path, "--knowledge", "http", "link", "q"})
              .exit_code == 2);
    CHECK(run_cli({"--schema", schema_path, "--knowledge", "fixture", "link", "q"})
              .exit_code == 2);
    CHECK(run_cli({"--help"}).exit_code == 0);
}

TEST_CASE("link prints spans and typed columns", "[cli]") {
    RunResult run = run_cli({"--schema", testing::fixture_path("pets_db.json"),
                             "--knowledge", "fixture", "--fixture",
                             testing::fixture_path("knowledge.tsv"), "link",
                             "Which owner has a 'poodle'?"});
    CHECK(run.exit_code == 0);
    CHECK(run.output ==
          "spans:\n"
          "  plain [0,1): which\n"
          "  table [1,2): owner\n"
          "  plain [2,3): has\n"
          "  plain [3,4): a\n"
          "  value [4,5): poodle\n"
          "columns:\n"
          "  name: none\n"
          "  owner_id: none\n"
          "  pet_id: none\n"
          "  pet_type: value_exact\n");
}

TEST_CASE("eval scores the committed pairs fixture", "[cli]") {
    // The third pair selects a different column, so two of three match.
    RunResult run = run_cli({"--schema", testing::fixture_path(""), "eval",
                             testing::fixture_path("eval_pairs.tsv")},
                            false);
    CHECK(run.exit_code == 0);
    CHECK(run.output ==
          "pairs: 3\n"
          "exact accuracy: 0.667\n"
          "select F1: 0.667\n"
          "where F1: 1.000\n"
          "group_by F1: 1.000\n"
          "having F1: 1.000\n"
          "order_by F1: 1.000\n"
          "from F1: 1.000\n"
          "keywords F1: 1.000\n");
}

TEST_CASE("eval reports full accuracy on identical pairs", "[cli]") {
    std::filesystem::path dir = scratch_dir("semql_cli_test_eval");
    std::filesystem::path pairs = dir / "pairs.tsv";
    write_file(pairs,
               "SELECT name FROM orchestra\tSELECT name FROM orchestra\tconcert_db\n"
               "SELECT name FROM orchestra\tSELECT name FROM orchestra\tconcert_db\n"
               "SELECT name FROM orchestra\tSELECT name FROM orchestra\tconcert_db\n");
    RunResult run = run_cli({"--schema", testing::fixture_path("concert_db.json"),
                             "eval", pairs.string()},
                            false);
    CHECK(run.exit_code == 0);
    CHECK_THAT(run.output, ContainsSubstring("pairs: 3\n"));
    CHECK_THAT(run.output, ContainsSubstring("exact accuracy: 1.000\n"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("eval scores unparseable predictions as zero", "[cli]") {
    std::filesystem::path dir = scratch_dir("semql_cli_test_eval_bad");
    std::filesystem::path pairs = dir / "pairs.tsv";
    write_file(pairs,
               "SELECT name FROM orchestra\tSELECT name FROM orchestra\tconcert_db\n"
               "SELEC garbage FROM\tSELECT name FROM orchestra\tconcert_db\n");
    RunResult run = run_cli({"--schema", testing::fixture_path("concert_db.json"),
                             "eval", pairs.string()},
                            false);
    CHECK(run.exit_code == 0);
    CHECK_THAT(run.output, ContainsSubstring("pairs: 2\n"));
    CHECK_THAT(run.output, ContainsSubstring("exact accuracy: 0.500\n"));
    CHECK_THAT(run.output, ContainsSubstring("select F1: 0.500\n"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("eval rejects lines naming unknown schemas", "[cli]") {
    std::filesystem::path dir = scratch_dir("semql_cli_test_eval_unknown");
    std::filesystem::path pairs = dir / "pairs.tsv";
    write_file(pairs, "SELECT name FROM orchestra\tSELECT name FROM orchestra\tnope_db\n");
    RunResult run = run_cli({"--schema", testing::fixture_path("concert_db.json"),
                             "eval", pairs.string()});
    CHECK(run.exit_code == 1);
    CHECK_THAT(run.output, StartsWith("error[Error]:"));
    CHECK_THAT(run.output, ContainsSubstring("unknown schema 'nope_db'"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("json lines format emits machine records", "[cli]") {
    SECTION("lift") {
        RunResult run = run_cli({"--schema", testing::fixture_path("social_db.json"),
                                 "--format", "json-lines", "lift",
                                 "SELECT name FROM student"});
        CHECK(run.exit_code == 0);
        CHECK(run.output ==
              "{\"semql\":\"(Z (R (Select (A none (C name) (T student)))))\"}\n");
    }
    SECTION("roundtrip") {
        RunResult run = run_cli({"--schema", testing::fixture_path("concert_db.json"),
                                 "--format", "json-lines", "roundtrip",
                                 "SELECT name FROM orchestra"});
        CHECK(run.exit_code == 0);
        CHECK_THAT(run.output, ContainsSubstring("\"match\":true"));
    }
    SECTION("link") {
        RunResult run = run_cli({"--schema", testing::fixture_path("pets_db.json"),
                                 "--format", "json-lines", "link", "Which owner?"});
        CHECK(run.exit_code == 0);
        CHECK_THAT(run.output, ContainsSubstring("\"degraded\":false"));
        CHECK_THAT(run.output, ContainsSubstring("\"owner_id\":\"none\""));
    }
    SECTION("eval") {
        RunResult run = run_cli({"--schema", testing::fixture_path(""), "--format",
                                 "json-lines", "eval",
                                 testing::fixture_path("eval_pairs.tsv")},
                                false);
        CHECK(run.exit_code == 0);
        CHECK_THAT(run.output, ContainsSubstring("{\"components\":"));
        CHECK_THAT(run.output, ContainsSubstring("\"pairs\":3"));
    }
}

TEST_CASE("stats reports corpus statistics and split OOV", "[cli]") {
    std::filesystem::path dir = scratch_dir("semql_cli_test_stats");
    std::filesystem::copy_file(testing::fixture_path("concert_db.json"),
                               dir / "concert_db.json");
    std::filesystem::copy_file(testing::fixture_path("social_db.json"),
                               dir / "social_db.json");
    write_file(dir / "train_spider.json",
               R"([{"db_id": "concert_db", "question": "q", "query": "SELECT 1"}])");
    write_file(dir / "dev.json", R"([{"db_id": "social_db"}])");

    RunResult run = run_cli({"stats", dir.string()}, false);
    CHECK(run.exit_code == 0);
    CHECK(run.output ==
          "schemas: 2\n"
          "schemas with duplicate columns: 100.0%\n"
          "mean duplicate column fraction: 51.5%\n"
          "oov rate (dev vs train): 60.0%\n");

    SECTION("example files are skipped with a note") {
        RunResult noisy = run_cli({"stats", dir.string()});
        CHECK_THAT(noisy.output,
                   ContainsSubstring("note: skipped dev.json (not a schema collection)"));
        CHECK_THAT(noisy.output, ContainsSubstring(
                                     "note: skipped train_spider.json (not a schema collection)"));
    }
    SECTION("the directory can come from the environment") {
        RunResult env_run = run_cli({"stats"}, false,
                                    "SPIDER_DATA_DIR=" + shell_quote(dir.string()) + " ");
        CHECK(env_run.exit_code == 0);
        CHECK(env_run.output == run.output);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("stats omits OOV without split files", "[cli]") {
    std::filesystem::path dir = scratch_dir("semql_cli_test_stats_plain");
    std::filesystem::copy_file(testing::fixture_path("social_db.json"),
                               dir / "social_db.json");
    RunResult run = run_cli({"stats", dir.string()}, false);
    CHECK(run.exit_code == 0);
    CHECK(run.output ==
          "schemas: 1\n"
          "schemas with duplicate columns: 100.0%\n"
          "mean duplicate column fraction: 66.7%\n");
    std::filesystem::remove_all(dir);
}
