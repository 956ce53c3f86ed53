#include <thread>

#include <gtest/gtest.h>

#include "ruckep/service.hpp"

using namespace ruckep;

namespace {

const DecisionService& service() {
  static const DecisionService s(demo_bundle());
  return s;
}

}  // namespace

TEST(Service, Health) {
  const auto r = service().handle("GET", "/api/health", {});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["bundle_id"], "demo");
}

TEST(Service, CaseStudyDecision) {
  const auto r = service().handle("GET", "/api/decision", {{"x", "30"}, {"y", "-20"}, {"d_touch", "20"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["delta"].get<double>(), 0.25, 0.015);
  EXPECT_EQ(r.body["recommendation"], "lineout");
  EXPECT_EQ(r.body["bundle_id"], "demo");
}

TEST(Service, KickDomainIs422) {
  const auto r = service().handle("GET", "/api/decision", {{"x", "4"}, {"y", "0"}, {"d_touch", "10"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["field"], "x");
  EXPECT_EQ(r.body["bundle_id"], "demo");
}

TEST(Service, BadQueryListsFields) {
  const auto r = service().handle("GET", "/api/decision", {{"x", "abc"}, {"d_touch", "10"}});
  ASSERT_EQ(r.status, 400);
  ASSERT_EQ(r.body["fields"].size(), 2u);
  EXPECT_EQ(r.body["fields"][0]["field"], "x");
  EXPECT_EQ(r.body["fields"][1]["field"], "y");
}

TEST(Service, GridParity) {
  const auto r = service().handle("GET", "/api/grid", {{"d_touch", "10"}, {"cards", "1"}, {"step", "5"}});
  ASSERT_EQ(r.status, 200);
  GridSpec spec;
  spec.x_step = spec.y_step = 5.0;
  const auto& b = service().bundle();
  auto local = to_json(decision_grid(spec, 10.0, GameContext::make(1, 0.0), b.models(), b.model_ids()));
  local["bundle_id"] = b.bundle_id;
  EXPECT_EQ(r.body, local);
}

TEST(Service, SweepAndRegret) {
  const auto s = service().handle("GET", "/api/sweep", {{"x", "30"}, {"y", "-20"}, {"dmax", "30"}});
  ASSERT_EQ(s.status, 200);
  EXPECT_EQ(s.body["points"].size(), 31u);
  EXPECT_TRUE(s.body["crossing"].is_number());

  const auto r = service().handle(
      "POST", "/api/regret", {},
      R"({"rows":[{"team":"NZ","lineout_ep":2.67,"kick_ep":2.42,"decision":"kick"}]})");
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["total_regret"].get<double>(), 0.25, 1e-12);

  const auto bad = service().handle("POST", "/api/regret", {}, R"([{"team":"NZ","decision":"maul"}])");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["fields"].size(), 3u);
}

TEST(Service, RoutingErrors) {
  EXPECT_EQ(service().handle("GET", "/api/nothing", {}).status, 404);
  EXPECT_EQ(service().handle("POST", "/api/decision", {}).status, 405);
  EXPECT_EQ(service().handle("GET", "/api/regret", {}).status, 405);
  EXPECT_EQ(service().handle("POST", "/api/regret", {}, "not json").status, 400);
  EXPECT_EQ(service().handle("GET", "/api/grid", {{"d_touch", "5"}, {"step", "0"}}).status, 422);
}

TEST(Service, Stateless) {
  const QueryParams q = {{"x", "22"}, {"y", "7"}, {"d_touch", "15"}, {"winpct", "0.2"}};
  const auto a = service().handle("GET", "/api/decision", q);
  service().handle("GET", "/api/grid", {{"d_touch", "3"}, {"step", "10"}});
  EXPECT_EQ(service().handle("GET", "/api/decision", q).body, a.body);
}

TEST(Service, OverHttp) {
  auto server = make_http_server(service());
  const int port = server->bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server->listen_after_bind(); });
  server->wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/api/decision?x=30&y=-20&d_touch=20");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("X-Bundle-Id"), "demo");
  const auto body = nlohmann::json::parse(res->body);
  EXPECT_NEAR(body["delta"].get<double>(), 0.25, 0.015);
  auto bad = cli.Get("/api/decision?x=4&y=0&d_touch=10");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 422);
  server->stop();
  t.join();
}
