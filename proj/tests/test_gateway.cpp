#include <gtest/gtest.h>

#include <cdist/cdist.hpp>

#include "support/temp_dir.hpp"

using namespace cdist;

namespace {

ModelHandle mock_handle(const std::string& id) {
  ModelHandle h;
  h.id = id;
  h.backend = Backend::mock;
  return h;
}

MockScript echo_script() {
  MockScript s;
  s.add_substring_rule("ping", "pong");
  s.add_substring_rule("", "fallback");  // empty needle matches everything
  return s;
}

}  // namespace

TEST(Gateway, MockDispatchAndStats) {
  RunLedger ledger;
  Gateway gw({}, &ledger);
  gw.register_mock("weak", echo_script());
  EXPECT_TRUE(gw.has_mock("weak"));
  EXPECT_FALSE(gw.has_mock("strong"));

  std::string out = gw.complete(mock_handle("weak"), {{Role::user, "ping"}});
  EXPECT_EQ(out, "pong");
  GatewayStats st = gw.stats();
  EXPECT_EQ(st.total_calls, 1u);
  EXPECT_EQ(st.mock_calls, 1u);
  EXPECT_EQ(st.live_calls, 0u);
  EXPECT_EQ(st.cache_hits, 0u);
}

TEST(Gateway, CompleteLogsCallEventInvokeDoesNot) {
  RunLedger ledger;
  Gateway gw({}, &ledger);
  gw.register_mock("weak", echo_script());

  CallRecord rec = gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  EXPECT_EQ(ledger.size(), 0u);  // invoke never logs
  EXPECT_EQ(rec.response, "pong");
  EXPECT_EQ(rec.model_id, "weak");
  EXPECT_EQ(rec.model_name, "weak");  // id fallback when model_name empty
  EXPECT_EQ(rec.source, CallSource::mock);
  EXPECT_EQ(rec.cache_key.size(), 64u);

  gw.log_call(rec);
  auto events = ledger.snapshot();
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, "call");
  EXPECT_EQ(events[0].data.at("response"), "pong");
  EXPECT_EQ(events[0].data.at("source"), "mock");

  gw.complete(mock_handle("weak"), {{Role::user, "ping again"}});
  EXPECT_EQ(ledger.size(), 2u);
}

TEST(Gateway, MockMissIsDescriptive) {
  Gateway gw({}, nullptr);
  // No fixture registered at all.
  try {
    gw.invoke(mock_handle("weak"), {{Role::user, "hello"}});
    FAIL() << "expected MockMissError";
  } catch (const MockMissError& e) {
    EXPECT_NE(std::string(e.what()).find("weak"), std::string::npos);
  }

  // Fixture registered but no rule matches: the error carries an excerpt of
  // the conversation that missed.
  MockScript s;
  s.add_substring_rule("never-matches", "x");
  gw.register_mock("weak", std::move(s));
  try {
    gw.invoke(mock_handle("weak"), {{Role::user, "distinctive-needle-text"}});
    FAIL() << "expected MockMissError";
  } catch (const MockMissError& e) {
    EXPECT_NE(std::string(e.what()).find("distinctive-needle-text"), std::string::npos);
  }
}

TEST(Gateway, HttpWithoutTransportIsTransportError) {
  Gateway gw({}, nullptr);
  ModelHandle h;
  h.id = "live";
  h.backend = Backend::http;
  h.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  EXPECT_THROW(gw.invoke(h, {{Role::user, "q"}}), TransportError);
}

TEST(Gateway, CacheHitSkipsBackend) {
  testsupport::TempDir tmp;
  Gateway gw(tmp.path(), nullptr);
  gw.register_mock("weak", echo_script());

  CallRecord first = gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  EXPECT_EQ(first.source, CallSource::mock);
  CallRecord second = gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  EXPECT_EQ(second.source, CallSource::cache);
  EXPECT_EQ(second.response, "pong");
  EXPECT_EQ(second.latency_ms, 0);
  EXPECT_EQ(second.cache_key, first.cache_key);

  GatewayStats st = gw.stats();
  EXPECT_EQ(st.total_calls, 2u);  // cache hits count toward the budget meter
  EXPECT_EQ(st.mock_calls, 1u);
  EXPECT_EQ(st.cache_hits, 1u);
  EXPECT_EQ(gw.total_calls(), 2u);

  // A fresh gateway over the same directory replays without its own mock.
  Gateway warm(tmp.path(), nullptr);
  CallRecord replayed = warm.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  EXPECT_EQ(replayed.source, CallSource::cache);
  EXPECT_EQ(replayed.response, "pong");
}

TEST(Gateway, CacheLayoutAndWriteOnce) {
  testsupport::TempDir tmp;
  Gateway gw(tmp.path(), nullptr);
  gw.register_mock("weak", echo_script());

  CallRecord rec = gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  auto path = tmp.path() / rec.cache_key.substr(0, 2) / (rec.cache_key + ".json");
  ASSERT_TRUE(std::filesystem::exists(path));
  auto first_write = std::filesystem::last_write_time(path);
  std::string first_bytes = read_file(path);

  // Same call again: the entry must not be rewritten.
  gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  EXPECT_EQ(std::filesystem::last_write_time(path), first_write);
  EXPECT_EQ(read_file(path), first_bytes);

  // The stored record round-trips through the documented format.
  CallRecord stored = call_record_from_json(json::parse(first_bytes));
  EXPECT_EQ(stored.cache_key, rec.cache_key);
  EXPECT_EQ(stored.response, "pong");
  EXPECT_EQ(stored.conversation, rec.conversation);
}

TEST(Gateway, CorruptCacheEntryIsAnError) {
  testsupport::TempDir tmp;
  Gateway gw(tmp.path(), nullptr);
  gw.register_mock("weak", echo_script());
  CallRecord rec = gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  auto path = tmp.path() / rec.cache_key.substr(0, 2) / (rec.cache_key + ".json");
  write_file_atomic(path, "{corrupt");
  EXPECT_THROW(gw.invoke(mock_handle("weak"), {{Role::user, "ping"}}), Error);
}

TEST(Gateway, DisabledCacheNeverTouchesDisk) {
  Gateway gw({}, nullptr);
  EXPECT_FALSE(gw.cache_enabled());
  gw.register_mock("weak", echo_script());
  gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  gw.invoke(mock_handle("weak"), {{Role::user, "ping"}});
  GatewayStats st = gw.stats();
  EXPECT_EQ(st.cache_hits, 0u);
  EXPECT_EQ(st.mock_calls, 2u);
}

TEST(Gateway, ValidatesConversationBeforeDispatch) {
  Gateway gw({}, nullptr);
  gw.register_mock("weak", echo_script());
  EXPECT_THROW(gw.invoke(mock_handle("weak"), {}), Error);
  EXPECT_THROW(gw.invoke(mock_handle("weak"),
                         {{Role::user, "q"}, {Role::system, "late system"}}),
               Error);
}

TEST(CallRecordJson, RoundTrip) {
  CallRecord r;
  r.cache_key = "abc";
  r.model_id = "weak";
  r.model_name = "weak-model";
  r.conversation = {{Role::system, "s"}, {Role::user, "u"}};
  r.decoding.temperature = 0.2;
  r.decoding.seed = 9;
  r.response = "out";
  r.latency_ms = 17;
  r.source = CallSource::cache;

  CallRecord back = call_record_from_json(call_record_to_json(r));
  EXPECT_EQ(back.cache_key, r.cache_key);
  EXPECT_EQ(back.model_id, r.model_id);
  EXPECT_EQ(back.model_name, r.model_name);
  EXPECT_EQ(back.conversation, r.conversation);
  EXPECT_EQ(back.decoding, r.decoding);
  EXPECT_EQ(back.response, r.response);
  EXPECT_EQ(back.latency_ms, r.latency_ms);
  EXPECT_EQ(back.source, CallSource::cache);
}

TEST(LedgerTest, AppendSnapshotAndSeq) {
  RunLedger ledger;
  EXPECT_EQ(ledger.append("note", json{{"text", "a"}}), 0u);
  EXPECT_EQ(ledger.append("note", json{{"text", "b"}}), 1u);
  auto events = ledger.snapshot();
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].seq, 0u);
  EXPECT_EQ(events[1].seq, 1u);
  EXPECT_EQ(events[1].data.at("text"), "b");
  EXPECT_GT(events[0].ts_ms, 0);
}

TEST(LedgerTest, FileMirrorAndAppendMode) {
  testsupport::TempDir tmp;
  auto p = tmp / "ledger.jsonl";
  {
    RunLedger ledger(p);
    ledger.append("note", json{{"text", "first"}});
    ledger.append("call", json{{"response", "x"}});
  }
  std::string content = read_file(p);
  EXPECT_EQ(std::count(content.begin(), content.end(), '\n'), 2);

  // Append mode continues sequence numbers from the existing line count.
  {
    RunLedger resumed(p, /*append=*/true);
    EXPECT_EQ(resumed.append("note", json{{"text", "resumed"}}), 2u);
  }
  content = read_file(p);
  EXPECT_EQ(std::count(content.begin(), content.end(), '\n'), 3);
  // Every line parses as a ledger event.
  std::istringstream in(content);
  std::string line;
  std::uint64_t expect_seq = 0;
  while (std::getline(in, line)) {
    LedgerEvent e = ledger_event_from_json(json::parse(line));
    EXPECT_EQ(e.seq, expect_seq++);
  }

  // Truncate mode starts the file over.
  {
    RunLedger fresh(p, /*append=*/false);
    fresh.append("note", json{{"text", "only"}});
  }
  content = read_file(p);
  EXPECT_EQ(std::count(content.begin(), content.end(), '\n'), 1);
}

TEST(LedgerTest, MaskedLinesZeroTimingFields) {
  RunLedger ledger;
  ledger.append("call", json{{"latency_ms", 55}, {"source", "live"}, {"response", "r"}});
  ledger.append("note", json{{"text", "keep"}});
  auto lines = masked_ledger_lines(ledger.snapshot());
  ASSERT_EQ(lines.size(), 2u);
  json first = json::parse(lines[0]);
  EXPECT_EQ(first.at("ts_ms"), 0);
  EXPECT_EQ(first.at("data").at("latency_ms"), 0);
  EXPECT_EQ(first.at("data").at("source"), "");
  EXPECT_EQ(first.at("data").at("response"), "r");
}

TEST(LedgerTest, ReplayAcceptedConceptIds) {
  RunLedger ledger;
  ledger.append("concept", json{{"concept_id", "A"}, {"status", "induced"}});
  ledger.append("concept", json{{"concept_id", "A"}, {"status", "refined"}});
  ledger.append("concept", json{{"concept_id", "A"}, {"status", "accepted"}});
  ledger.append("concept", json{{"concept_id", "B"}, {"status", "rejected"}});
  ledger.append("concept", json{{"concept_id", "C"}, {"status", "accepted"}});
  ledger.append("note", json{{"text", "noise"}});
  EXPECT_EQ(replay_accepted_concept_ids(ledger.snapshot()),
            (std::vector<std::string>{"A", "C"}));
}
