#include "smocklab/runner.hpp"
#include "smocklab/service.hpp"
#include "support.hpp"

#include <doctest.h>
#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <thread>

using namespace smocklab;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  ServiceConfig cfg;
  std::unique_ptr<DesignService> service;
  int port = 0;

  explicit Fixture(int sync_threshold = 200, bool fresh = true) {
    dir = fs::temp_directory_path() / "smocklab_service_test";
    if (fresh) fs::remove_all(dir);
    cfg.data_dir = dir;
    cfg.sync_threshold = sync_threshold;
    start();
  }
  ~Fixture() {
    service.reset();
    fs::remove_all(dir);
  }
  void start() {
    service = std::make_unique<DesignService>(cfg);
    port = service->start_background();
    REQUIRE(port > 0);
  }
  void restart() {
    service.reset();
    start();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

std::string fixture_text(const char* name) { return read_text(testing::fixture(name)); }

std::string create(httplib::Client& c, const std::string& pattern) {
  auto r = c.Post("/sessions", pattern, "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 201);
  return Json::parse(r->body)["id"].get<std::string>();
}

}  // namespace

TEST_CASE("health and CORS") {
  Fixture f;
  auto c = f.client();
  auto r = c.Get("/healthz");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == "ok");
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
  auto o = c.Options("/sessions");
  REQUIRE(o);
  CHECK(o->status == 204);
}

TEST_CASE("simulate and fetch results") {
  Fixture f;
  auto c = f.client();
  const std::string id = create(c, fixture_text("braid"));

  auto g = c.Get("/sessions/" + id);
  REQUIRE(g);
  CHECK(g->status == 200);
  auto sj = Json::parse(g->body);
  CHECK(sj["id"] == id);
  CHECK(sj["results"].is_null());

  CHECK(c.Get("/sessions/" + id + "/result/mesh")->status == 404);

  auto s = c.Post("/sessions/" + id + "/simulate", "{}", "application/json");
  REQUIRE(s);
  CHECK(s->status == 200);

  const auto doc = load_pattern(testing::fixture("braid"));
  const auto sim = simulate(doc, Json::object(), Stage::Arap);
  for (const char* variant : {"merged", "fine"})
    for (const char* color : {"none", "height", "energy"}) {
      auto m = c.Get("/sessions/" + id + "/result/mesh?variant=" + variant + "&color=" + color);
      REQUIRE(m);
      CHECK(m->status == 200);
      CHECK(m->body == render_obj(sim.pattern, sim.design, parse_variant(variant), parse_color(color)));
    }
  CHECK(c.Get("/sessions/" + id + "/result/mesh")->body ==
        render_obj(sim.pattern, sim.design, MeshVariant::Merged, ColorField::None));
  CHECK(c.Get("/sessions/" + id + "/result/mesh?variant=coarse")->status == 422);

  auto d = c.Get("/sessions/" + id + "/result/diagnostics");
  REQUIRE(d);
  CHECK(d->status == 200);
  auto st = c.Get("/sessions/" + id + "/result/stage");
  REQUIRE(st);
  CHECK(Json::parse(st->body)["stage"] == "arap");

  // A new pattern invalidates the result.
  auto put = c.Put("/sessions/" + id + "/pattern", fixture_text("box"), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(c.Get("/sessions/" + id + "/result/mesh")->status == 404);
  CHECK(c.Get("/sessions/" + id + "/result/diagnostics")->status == 404);
}

TEST_CASE("stage-only simulation") {
  Fixture f;
  auto c = f.client();
  const std::string id = create(c, fixture_text("box"));
  auto s = c.Post("/sessions/" + id + "/simulate", R"({"stage": "pleat"})", "application/json");
  REQUIRE(s);
  CHECK(s->status == 200);
  CHECK(Json::parse(c.Get("/sessions/" + id + "/result/stage")->body)["stage"] == "pleat");
  CHECK(c.Get("/sessions/" + id + "/result/mesh")->status == 404);
}

TEST_CASE("request errors") {
  Fixture f;
  auto c = f.client();
  auto bad = c.Post("/sessions", fixture_text("bad"), "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  CHECK(Json::parse(bad->body)["pointer"] == "/lines/0/1");

  CHECK(c.Post("/sessions", "{not json", "application/json")->status == 422);
  CHECK(c.Get("/sessions/deadbeef")->status == 404);
  CHECK(c.Post("/sessions/deadbeef/simulate", "{}", "application/json")->status == 404);

  const std::string id = create(c, fixture_text("minimal"));
  auto unknown = c.Post("/sessions/" + id + "/simulate", R"({"stages": "arap"})", "application/json");
  REQUIRE(unknown);
  CHECK(unknown->status == 422);
  CHECK(Json::parse(unknown->body)["pointer"] == "/stages");

  auto badparam = c.Post("/sessions/" + id + "/simulate", R"({"params": {"w_embed": "x"}})", "application/json");
  REQUIRE(badparam);
  CHECK(badparam->status == 422);
  CHECK(Json::parse(badparam->body)["pointer"] == "/params/w_embed");

  auto put = c.Put("/sessions/" + id + "/pattern", fixture_text("bad"), "application/json");
  REQUIRE(put);
  CHECK(put->status == 422);
}

TEST_CASE("asynchronous jobs") {
  Fixture f(0);
  auto c = f.client();
  const std::string id = create(c, fixture_text("arrow"));
  auto s = c.Post("/sessions/" + id + "/simulate", R"({"params": {"subdivision": 8}})", "application/json");
  REQUIRE(s);
  CHECK(s->status == 202);
  const auto job = Json::parse(s->body);
  CHECK(job["state"] == "running");

  CHECK(c.Post("/sessions/" + id + "/simulate", "{}", "application/json")->status == 409);
  CHECK(c.Put("/sessions/" + id + "/pattern", fixture_text("box"), "application/json")->status == 409);

  f.service->wait_idle();
  auto j = c.Get("/sessions/" + id + "/job");
  REQUIRE(j);
  const auto status = Json::parse(j->body);
  CHECK(status["job_id"] == job["job_id"]);
  CHECK(status["state"] == "done");
  CHECK(c.Get("/sessions/" + id + "/result/mesh")->status == 200);
  CHECK(Json::parse(c.Get("/sessions/" + id)->body)["params"]["subdivision"] == 8);
}

TEST_CASE("sessions survive a restart") {
  Fixture f;
  std::string id, mesh;
  {
    auto c = f.client();
    id = create(c, fixture_text("braid"));
    REQUIRE(c.Post("/sessions/" + id + "/simulate", "{}", "application/json")->status == 200);
    mesh = c.Get("/sessions/" + id + "/result/mesh")->body;
  }
  f.restart();
  auto c = f.client();
  auto g = c.Get("/sessions/" + id);
  REQUIRE(g);
  CHECK(g->status == 200);
  CHECK(Json::parse(g->body)["pattern"] == Json::parse(fixture_text("braid")));
  auto m = c.Get("/sessions/" + id + "/result/mesh");
  REQUIRE(m);
  CHECK(m->status == 200);
  CHECK(m->body == mesh);
}
