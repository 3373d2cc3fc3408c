#include <catch2/catch_amalgamated.hpp>

#include "semql/metrics.hpp"
#include "semql/sql_parse.hpp"
#include "support/fixtures.hpp"

using namespace semql;
using Catch::Matchers::WithinAbs;

TEST_CASE("identical queries score exact with unit F1 everywhere", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery q = parse_sql("SELECT name FROM student WHERE age > 20 ORDER BY age DESC",
                           social);
    MatchReport report = component_match(q, q);
    CHECK(report.exact);
    for (const std::string& name : component_names()) {
        INFO(name);
        CHECK(report.components.at(name) == ComponentScore{1.0, 1.0, 1.0});
    }
}

TEST_CASE("literal changes keep exact match", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery a = parse_sql("SELECT name FROM student WHERE age > 20", social);
    SqlQuery b = parse_sql("SELECT name FROM student WHERE age > 85", social);
    MatchReport report = component_match(a, b);
    CHECK(report.exact);
    CHECK(report.components.at("where").f1 == 1.0);
}

TEST_CASE("partially overlapping select lists score a half F1", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery pred = parse_sql("SELECT name, age FROM student", social);
    SqlQuery gold = parse_sql("SELECT name, student_id FROM student", social);
    MatchReport report = component_match(pred, gold);
    CHECK_FALSE(report.exact);
    ComponentScore select = report.components.at("select");
    CHECK_THAT(select.precision, WithinAbs(0.5, 1e-12));
    CHECK_THAT(select.recall, WithinAbs(0.5, 1e-12));
    CHECK_THAT(select.f1, WithinAbs(0.5, 1e-12));
    // untouched components still match perfectly
    CHECK(report.components.at("from") == ComponentScore{1.0, 1.0, 1.0});
    CHECK(report.components.at("where") == ComponentScore{1.0, 1.0, 1.0});
}

TEST_CASE("one-sided clauses score zero", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery pred = parse_sql("SELECT name FROM student", social);
    SqlQuery gold = parse_sql("SELECT name FROM student WHERE age > 20", social);
    MatchReport report = component_match(pred, gold);
    CHECK_FALSE(report.exact);
    ComponentScore where = report.components.at("where");
    CHECK(where.precision == 0.0);
    CHECK(where.recall == 0.0);
    CHECK(where.f1 == 0.0);
}

TEST_CASE("set operation sides participate through the keywords component", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery a = parse_sql("SELECT name FROM student UNION SELECT name FROM friend", social);
    SqlQuery b = parse_sql("SELECT name FROM student UNION SELECT age FROM student", social);
    MatchReport report = component_match(a, b);
    CHECK_FALSE(report.exact);
    CHECK(report.components.at("select") == ComponentScore{1.0, 1.0, 1.0});
    CHECK(report.components.at("keywords").f1 < 1.0);
}

TEST_CASE("component F1 is symmetric with swapped roles", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery a = parse_sql("SELECT name, age FROM student WHERE age > 20", social);
    SqlQuery b = parse_sql("SELECT name FROM student WHERE age > 20 AND name = 'A'", social);
    MatchReport ab = component_match(a, b);
    MatchReport ba = component_match(b, a);
    for (const std::string& name : component_names()) {
        INFO(name);
        CHECK_THAT(ab.components.at(name).f1, WithinAbs(ba.components.at(name).f1, 1e-12));
        CHECK_THAT(ab.components.at(name).precision,
                   WithinAbs(ba.components.at(name).recall, 1e-12));
    }
}

TEST_CASE("conjunct order does not change any component score", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    SqlQuery a = parse_sql(
        "SELECT name FROM student WHERE age > 20 AND name LIKE 'A%'", social);
    SqlQuery b = parse_sql(
        "SELECT name FROM student WHERE name LIKE 'B%' AND age > 99", social);
    MatchReport report = component_match(a, b);
    CHECK(report.exact);
    CHECK(report.components.at("where") == ComponentScore{1.0, 1.0, 1.0});
}

TEST_CASE("out-of-vocabulary rate over schema name tokens", "[metrics]") {
    Schema train1;
    train1.tables.push_back(Table{"concert_hall",
                                  {Column{"hall_id", {"hall", "id"}},
                                   Column{"city", {"city"}}},
                                  0});
    Schema eval1;
    eval1.tables.push_back(Table{"city_hall",
                                 {Column{"mayor_name", {"mayor", "name"}}},
                                 std::nullopt});
    // eval vocab: {city, hall, mayor, name}; unseen: {mayor, name} -> 0.5
    CHECK_THAT(oov_rate({train1}, {eval1}), WithinAbs(0.5, 1e-12));

    SECTION("identical corpora have no unseen words") {
        CHECK(oov_rate({train1}, {train1}) == 0.0);
    }
    SECTION("empty eval list scores zero") {
        CHECK(oov_rate({train1}, {}) == 0.0);
    }
    SECTION("empty train list makes everything unseen") {
        CHECK(oov_rate({}, {eval1}) == 1.0);
    }
}

TEST_CASE("duplicate column statistics", "[metrics]") {
    Schema dup = testing::load_fixture("social_db.json");
    // social: student(student_id, name, age), friend(student_id, friend_id, name)
    // duplicated names: student_id, name -> 4 of 6 column instances
    CorpusStats one = duplicate_column_stats({dup});
    CHECK(one.schemas_with_duplicate_columns == 1.0);
    CHECK_THAT(one.mean_duplicate_column_fraction, WithinAbs(4.0 / 6.0, 1e-12));

    Schema clean;
    clean.tables.push_back(Table{"a", {Column{"x", {"x"}}, Column{"y", {"y"}}}, 0});
    clean.tables.push_back(Table{"b", {Column{"z", {"z"}}}, 0});
    CorpusStats none = duplicate_column_stats({clean});
    CHECK(none.schemas_with_duplicate_columns == 0.0);
    CHECK(none.mean_duplicate_column_fraction == 0.0);

    SECTION("mixed corpus averages per schema") {
        CorpusStats mixed = duplicate_column_stats({dup, clean});
        CHECK_THAT(mixed.schemas_with_duplicate_columns, WithinAbs(0.5, 1e-12));
        CHECK_THAT(mixed.mean_duplicate_column_fraction, WithinAbs(2.0 / 6.0, 1e-12));
    }
    SECTION("empty corpus scores zeros") {
        CHECK(duplicate_column_stats({}) == CorpusStats{});
    }
    SECTION("repeats inside one table do not count as cross-table duplicates") {
        // same name twice in ONE table only counts once per table
        Schema odd;
        odd.tables.push_back(Table{"only", {Column{"k", {"k"}}}, std::nullopt});
        CHECK(duplicate_column_stats({odd}).schemas_with_duplicate_columns == 0.0);
    }
}

TEST_CASE("exact match is invariant under benign mutations", "[metrics]") {
    Schema social = testing::load_fixture("social_db.json");
    const char* mutations[][2] = {
        {"SELECT name, age FROM student", "SELECT age, name FROM student"},
        {"SELECT name FROM student WHERE age > 20 AND name = 'T'",
         "SELECT name FROM student WHERE name = 'Q' AND age > 5"},
        {"SELECT student.name FROM student JOIN friend"
         " ON friend.student_id = student.student_id",
         "SELECT student.name FROM friend JOIN student"
         " ON friend.friend_id = student.student_id"},
    };
    for (const auto& pair : mutations) {
        INFO(pair[0]);
        SqlQuery a = parse_sql(pair[0], social);
        SqlQuery b = parse_sql(pair[1], social);
        MatchReport report = component_match(a, b);
        CHECK(report.exact);
        for (const std::string& name : component_names())
            CHECK(report.components.at(name).f1 == 1.0);
    }
}
