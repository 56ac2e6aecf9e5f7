#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/reward/external.hpp"

using namespace prof;
using namespace std::chrono_literals;

namespace {

std::vector<std::string> child(const char* script) {
  return {"python3",
          (std::filesystem::path(PROF_FIXTURES_DIR) / "external" / script)
              .string()};
}

}  // namespace

TEST_CASE("external reward round-trips transitions") {
  ExternalReward ext(child("echo_reward.py"), 3, 2);
  REQUIRE(ext.alive());

  std::vector<double> obs = {1.5, 0.0, -2.0};
  std::vector<double> act = {0.25, 0.75};
  std::vector<double> next = {0.0, 0.0, 4.0};
  auto r = ext.evaluate(obs, act, next);
  REQUIRE(r.ok());
  // The child computes obs[0] + 2*next[-1] - sum(act).
  CHECK(r.value() == doctest::Approx(1.5 + 8.0 - 1.0));

  // The session is persistent: more calls go through the same child.
  for (int i = 0; i < 20; ++i) {
    obs[0] = i;
    auto again = ext.evaluate(obs, act, next);
    REQUIRE(again.ok());
    CHECK(again.value() == doctest::Approx(i + 8.0 - 1.0));
  }
  CHECK(ext.alive());
}

TEST_CASE("external reward with no actions sends empty act arrays") {
  ExternalReward ext(child("echo_reward.py"), 2, 0);
  std::vector<double> obs = {3.0, 1.0};
  std::vector<double> next = {0.5, -1.0};
  auto r = ext.evaluate(obs, {}, next);
  REQUIRE(r.ok());
  CHECK(r.value() == doctest::Approx(3.0 - 2.0));
}

TEST_CASE("non-finite replies are data errors, not protocol errors") {
  ExternalReward ext(child("reply_nan.py"), 2, 1);
  std::vector<double> v = {0.0, 0.0};
  std::vector<double> a = {0.0};
  auto r = ext.evaluate(v, a, v);
  REQUIRE(!r.ok());
  CHECK(r.error_kind() == EvalErrorKind::kNonFinite);
  // The child still runs; the next call fails the same way.
  CHECK(ext.alive());
  CHECK(ext.evaluate(v, a, v).error_kind() == EvalErrorKind::kNonFinite);
}

TEST_CASE("undecodable replies are protocol errors") {
  ExternalReward ext(child("reply_garbage.py"), 2, 1);
  std::vector<double> v = {0.0, 0.0};
  std::vector<double> a = {0.0};
  auto r = ext.evaluate(v, a, v);
  REQUIRE(!r.ok());
  CHECK(r.error_kind() == EvalErrorKind::kProtocol);
}

TEST_CASE("well-formed replies of the wrong shape are protocol errors") {
  ExternalReward ext(child("reply_wrong_type.py"), 2, 1);
  std::vector<double> v = {0.0, 0.0};
  std::vector<double> a = {0.0};
  CHECK(ext.evaluate(v, a, v).error_kind() == EvalErrorKind::kProtocol);
}

TEST_CASE("a stalled child times out and the session dies") {
  ExternalReward ext(child("slow_reply.py"), 2, 1, 400ms);
  std::vector<double> v = {0.0, 0.0};
  std::vector<double> a = {0.0};
  auto start = std::chrono::steady_clock::now();
  auto r = ext.evaluate(v, a, v);
  auto elapsed = std::chrono::steady_clock::now() - start;
  REQUIRE(!r.ok());
  CHECK(r.error_kind() == EvalErrorKind::kTimeout);
  CHECK(elapsed < 5s);
  CHECK(!ext.alive());
  // Dead sessions refuse further work instead of hanging.
  CHECK(ext.evaluate(v, a, v).error_kind() == EvalErrorKind::kSpawn);
}

TEST_CASE("construction failures throw") {
  SUBCASE("missing program") {
    try {
      ExternalReward ext({"/nonexistent/prof-reward-child"}, 2, 1, 2000ms);
      FAIL("expected a spawn error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::spawn);
    }
  }

  SUBCASE("empty command") {
    try {
      ExternalReward ext({}, 2, 1);
      FAIL("expected a spawn error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::spawn);
    }
  }

  SUBCASE("wrong handshake reply") {
    try {
      ExternalReward ext(child("bad_handshake.py"), 2, 1, 3000ms);
      FAIL("expected a protocol error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::protocol);
    }
  }

  SUBCASE("handshake timeout") {
    try {
      ExternalReward ext(child("slow_handshake.py"), 2, 1, 500ms);
      FAIL("expected a timeout error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::timeout);
    }
  }
}
