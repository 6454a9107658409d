#include <atomic>

#include "doctest.h"
#include "json.hpp"
#include "kgreason/llm/chat_client.hpp"
#include "kgreason/llm/parse.hpp"
#include "kgreason/llm/scripted.hpp"
#include "support.hpp"

using namespace kgreason;
using llm::ParseErrorKind;
using Items = std::vector<std::string>;

namespace {

ParseErrorKind list_error(std::string_view text) {
    try {
        llm::parse_list(text);
    } catch (const llm::ParseError& e) {
        return e.kind();
    }
    FAIL("expected a ParseError");
    return ParseErrorKind::no_list_found;
}

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("parse_list handles the usual wrappings") {
    CHECK(llm::parse_list(R"(["a", "b"])") == Items{"a", "b"});
    CHECK(llm::parse_list("```json\n[\"Panama\"]\n```") == Items{"Panama"});
    CHECK(llm::parse_list("The relevant relations are: ['film.film.story_by', 'film.film.genre'] based on Q.") ==
          Items{"film.film.story_by", "film.film.genre"});
    CHECK(llm::parse_list("[Juan Carlos Varela, Panama City]") == Items{"Juan Carlos Varela", "Panama City"});
    CHECK(llm::parse_list("[\n  a,\n  b\n]") == Items{"a", "b"});
    CHECK(llm::parse_list("[\"a\", \"b\",]") == Items{"a", "b"});
    CHECK(llm::parse_list("[]").empty());
    CHECK(llm::parse_list(R"(["Café", "😀", "say \"hi\""])") ==
          Items{"Caf\xC3\xA9", "\xF0\x9F\x98\x80", "say \"hi\""});
    CHECK(llm::parse_list("['Walsh's film']") == Items{"Walsh's film"});
    CHECK(llm::parse_list("[[nested], x]") == Items{"[nested]", "x"});
}

TEST_CASE("parse_list reports typed errors") {
    CHECK(list_error("no brackets here") == ParseErrorKind::no_list_found);
    CHECK(list_error("") == ParseErrorKind::no_list_found);
    CHECK(list_error("[\"a\", \"b\"") == ParseErrorKind::unbalanced_brackets);
    CHECK(llm::to_string(ParseErrorKind::no_list_found) == "no-list-found");
}

TEST_CASE("render_list round-trips") {
    Items items{"a", "with, comma", "quote \" inside", "Zo\xC3\xAB"};
    CHECK(llm::parse_list(llm::render_list(items)) == items);
    CHECK(llm::render_list({"Panama"}) == "[\"Panama\"]");
}

TEST_CASE("JSON object extraction") {
    auto j = llm::extract_json_object("Sure!\n```json\n{\"A\": \"Juan Carlos Varela\", \"R\": \"because\"}\n```");
    CHECK(j["A"] == "Juan Carlos Varela");
    CHECK(llm::extract_json_object("{'Add': 'Yes', 'Reason': 'x',}")["Add"] == "Yes");
    CHECK(llm::extract_json_object("{\"ok\": True, \"none\": None}")["ok"] == true);
    CHECK(llm::extract_json_object("prefix {bad} then {\"1\": \"x\"}")["1"] == "x");

    try {
        llm::parse_json_object("{\"A\": \"x\"}", {"A", "R"});
        FAIL("expected missing key");
    } catch (const llm::ParseError& e) {
        CHECK(e.kind() == ParseErrorKind::missing_required_key);
        CHECK(e.key() == "R");
    }
    CHECK_THROWS_AS(llm::extract_json_object("nothing"), llm::ParseError);
    CHECK_THROWS_AS(llm::extract_json_object("{\"A\": "), llm::ParseError);
}

TEST_CASE("boolish and text helpers") {
    CHECK(llm::as_boolish("Yes.") == true);
    CHECK(llm::as_boolish(" no ") == false);
    CHECK(llm::as_boolish(true) == true);
    CHECK(llm::as_boolish(0) == false);
    CHECK_FALSE(llm::as_boolish("maybe").has_value());
    CHECK(llm::as_text(nlohmann::json("x")) == "x");
    CHECK(llm::as_text(nlohmann::json()) == "");
    CHECK(llm::as_text(nlohmann::json(3)) == "3");
}

TEST_CASE("token estimate is ceil(code points / 4)") {
    CHECK(llm::approx_tokens("") == 0);
    CHECK(llm::approx_tokens("abc") == 1);
    CHECK(llm::approx_tokens("abcd") == 1);
    CHECK(llm::approx_tokens("abcde") == 2);
    CHECK(llm::approx_tokens("\xE6\x9D\xB1\xE4\xBA\xAC") == 1);  // two code points
}

TEST_CASE("scripted responder: first match wins, regex and default") {
    auto r = llm::ScriptedResponder::from_json(R"({"rules": [
        {"match": "Panama", "response": "first"},
        {"match": "re:^Q: \\d+$", "response": "digits"},
        {"match": "Panama City", "response": "never"}],
        "default": "fallback"})");
    CHECK(r.rule_count() == 3);
    CHECK(r.respond("Panama City") == "first");
    CHECK(r.respond("Q: 42") == "digits");
    CHECK(r.respond("other") == "fallback");

    llm::GenerationConfig cfg;
    auto c = r.complete("Q: 42", cfg);
    CHECK(c.text == "digits");
    CHECK(c.usage == llm::Usage{2, 2});

    llm::ScriptedResponder strict({llm::ScriptRule::contains("x", "y")});
    try {
        strict.complete("nothing", cfg);
        FAIL("expected LlmError");
    } catch (const llm::LlmError& e) {
        CHECK(e.kind() == llm::LlmErrorKind::no_matching_rule);
    }
    CHECK_THROWS_AS(llm::ScriptedResponder::from_json("{\"rules\": [{\"match\": 1}]}"), std::invalid_argument);
    CHECK_THROWS_AS(llm::ScriptedResponder::from_json("not json"), std::invalid_argument);
}

TEST_CASE("generation config defaults and validation") {
    llm::GenerationConfig cfg;
    CHECK(cfg.temperature == doctest::Approx(0.3));
    CHECK(cfg.max_tokens == 1024);
    CHECK(cfg.frequency_penalty == 0.0);
    CHECK(cfg.presence_penalty == 0.0);
    cfg.max_tokens = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("chat client wire format and usage") {
    nlohmann::json seen;
    std::string auth, path;
    testing::LocalServer server([&](const std::string& p, const auto& headers, const std::string& body, int& status,
                                    std::string& out, std::string&) {
        path = p;
        seen = nlohmann::json::parse(body);
        auth = headers.count("Authorization") ? headers.at("Authorization") : "";
        status = 200;
        out = R"({"choices": [{"message": {"role": "assistant", "content": "[\"Panama\"]"}}],
                  "usage": {"prompt_tokens": 11, "completion_tokens": 3, "total_tokens": 14}})";
    });

    llm::ChatClientOptions o;
    o.base_url = server.url("/v1/");
    o.api_key = "test-key";
    o.retry = {3, std::chrono::milliseconds(1)};
    llm::ChatClient client(o);
    llm::GenerationConfig cfg;
    auto c = client.complete("Which entities?", cfg);

    CHECK(path == "/v1/chat/completions");
    CHECK(auth == "Bearer test-key");
    CHECK(seen["model"] == "gpt-3.5-turbo");
    CHECK(seen["messages"].size() == 1);
    CHECK(seen["messages"][0]["role"] == "user");
    CHECK(seen["messages"][0]["content"] == "Which entities?");
    CHECK(seen["temperature"] == doctest::Approx(0.3));
    CHECK(seen["max_tokens"] == 1024);
    CHECK(seen["frequency_penalty"] == 0.0);
    CHECK(seen["presence_penalty"] == 0.0);
    CHECK(c.text == "[\"Panama\"]");
    CHECK(c.usage == llm::Usage{11, 3});
    CHECK(nlohmann::json::parse(llm::ChatClient::request_body("Which entities?", cfg)) == seen);
}

TEST_CASE("chat client retries and classifies failures") {
    std::atomic<int> hits{0};
    testing::LocalServer flaky([&](const std::string&, const auto&, const std::string&, int& status, std::string& out,
                                   std::string&) {
        status = ++hits < 3 ? 500 : 200;
        out = status == 200 ? R"({"choices": [{"message": {"content": "ok"}}]})" : "oops";
    });
    llm::ChatClientOptions o;
    o.base_url = flaky.url();
    o.retry = {3, std::chrono::milliseconds(1)};
    auto c = llm::ChatClient(o).complete("hello world!", {});
    CHECK(hits == 3);
    CHECK(c.text == "ok");
    CHECK(c.usage == llm::Usage{3, 1});  // no usage block: estimated

    std::atomic<int> denied{0};
    testing::LocalServer auth([&](const std::string&, const auto&, const std::string&, int& status, std::string& out,
                                  std::string&) {
        ++denied;
        status = 401;
        out = "no";
    });
    o.base_url = auth.url();
    try {
        llm::ChatClient(o).complete("x", {});
        FAIL("expected LlmError");
    } catch (const llm::LlmError& e) {
        CHECK(e.kind() == llm::LlmErrorKind::transport);
    }
    CHECK(denied == 1);

    testing::LocalServer limited([&](const std::string&, const auto&, const std::string&, int& status,
                                     std::string& out, std::string&) {
        status = 429;
        out = "slow down";
    });
    o.base_url = limited.url();
    try {
        llm::ChatClient(o).complete("x", {});
        FAIL("expected LlmError");
    } catch (const llm::LlmError& e) {
        CHECK(e.kind() == llm::LlmErrorKind::rate_limited);
    }

    testing::LocalServer empty([&](const std::string&, const auto&, const std::string&, int& status, std::string& out,
                                   std::string&) {
        status = 200;
        out = R"({"choices": []})";
    });
    o.base_url = empty.url();
    try {
        llm::ChatClient(o).complete("x", {});
        FAIL("expected LlmError");
    } catch (const llm::LlmError& e) {
        CHECK(e.kind() == llm::LlmErrorKind::bad_response);
    }
}

}  // TEST_SUITE
