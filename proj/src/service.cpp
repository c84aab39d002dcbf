#include "smocklab/service.hpp"

#include "smocklab/error.hpp"
#include "smocklab/runner.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>

namespace smocklab {

namespace {

constexpr const char* kJson = "application/json";

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message, const std::string& pointer = {},
                 const std::string& kind = {}) {
  Json body = {{"error", message}};
  if (!pointer.empty()) body["pointer"] = pointer;
  if (!kind.empty()) body["kind"] = kind;
  reply(res, status, body);
}

int status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Io: return 500;
    default: return 422;
  }
}

const char* kVariants[] = {"fine", "merged"};
const char* kColors[] = {"none", "height", "energy"};

}  // namespace

DesignService::DesignService(ServiceConfig config) : config_(std::move(config)) {
  std::filesystem::create_directories(config_.data_dir);
  replay();
}

DesignService::~DesignService() {
  stop();
  wait_idle();
}

void DesignService::wait_idle() {
  std::vector<std::thread> done;
  {
    std::lock_guard lock(mutex_);
    done.swap(workers_);
  }
  for (auto& t : done)
    if (t.joinable()) t.join();
}

std::string DesignService::fresh_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
    if (!sessions_.count(buf)) return buf;
  }
}

void DesignService::append(const std::string& id, const Json& record) {
  std::ofstream out(config_.data_dir / (id + ".jsonl"), std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot append to session log " + id);
  out << record.dump() << '\n';
  out.flush();
}

void DesignService::replay() {
  for (const auto& entry : std::filesystem::directory_iterator(config_.data_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    auto s = std::make_shared<Session>();
    s->id = entry.path().stem().string();
    std::ifstream in(entry.path());
    std::string line;
    bool created = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Json rec;
      try {
        rec = Json::parse(line);
      } catch (const Json::parse_error&) {
        spdlog::warn("skipping torn record in {}", entry.path().string());
        continue;
      }
      const std::string op = rec.value("op", "");
      s->updated_at = rec.value("at", s->updated_at);
      if (op == "create") {
        s->pattern = rec["pattern"];
        s->params = rec.value("params", Json::object());
        created = true;
      } else if (op == "pattern") {
        s->pattern = rec["pattern"];
        s->result.reset();
        ++s->generation;
      } else if (op == "params") {
        s->params = rec["params"];
      } else if (op == "result" && rec.value("generation", -1) == s->generation) {
        Result r;
        r.diagnostics = rec["diagnostics"];
        r.stage = rec["stage"];
        for (const auto& [k, v] : rec["meshes"].items()) r.meshes[k] = config_.data_dir / v.get<std::string>();
        s->result = std::move(r);
      }
    }
    if (created) sessions_[s->id] = s;
  }
  if (!sessions_.empty()) spdlog::info("restored {} session(s)", sessions_.size());
}

std::shared_ptr<DesignService::Session> DesignService::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Json DesignService::session_json(const Session& s) const {
  Json j = {{"id", s.id}, {"pattern", s.pattern}, {"params", s.params}, {"updated_at", s.updated_at},
            {"busy", s.busy}};
  if (s.result) {
    j["results"] = {{"diagnostics", s.result->diagnostics}, {"stage", s.result->stage.value("stage", "")}};
  } else {
    j["results"] = nullptr;
  }
  if (s.job) j["job"] = {{"id", s.job->id}, {"state", s.job->state}, {"error", s.job->error}};
  return j;
}

Json DesignService::run_simulation(const std::shared_ptr<Session>& s, const Json& pattern, const Json& params,
                                   Stage stage, int generation) {
  const PatternDocument doc = parse_pattern(pattern);
  const Simulation sim = simulate(doc, params, stage);

  Result r;
  r.diagnostics = diagnostics_json(sim.pattern, sim.design, sim.report ? &*sim.report : nullptr);
  r.stage = stage_json(sim.design);
  Json files = Json::object();
  if (sim.design.completed == Stage::Arap) {
    for (const char* variant : kVariants) {
      for (const char* color : kColors) {
        const std::string key = std::string(variant) + "-" + color;
        const std::string name = s->id + "-g" + std::to_string(generation) + "-" + key + ".obj";
        write_text(config_.data_dir / name,
                   render_obj(sim.pattern, sim.design, parse_variant(variant), parse_color(color)));
        r.meshes[key] = config_.data_dir / name;
        files[key] = name;
      }
    }
  }
  std::lock_guard lock(mutex_);
  if (s->generation != generation) return r.diagnostics;  // pattern replaced meanwhile
  s->updated_at = now_iso();
  append(s->id, {{"op", "result"}, {"generation", generation}, {"diagnostics", r.diagnostics}, {"stage", r.stage},
                 {"meshes", files}, {"at", s->updated_at}});
  Json out = r.diagnostics;
  s->result = std::move(r);
  return out;
}

void DesignService::mount(httplib::Server& server) {
  const std::string origin = config_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

  server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error&) {
      return reply_error(res, 422, "request body is not valid JSON", "", "schema");
    }
    try {
      materialize(parse_pattern(body));
    } catch (const Error& e) {
      return reply_error(res, status_for(e) == 404 ? 422 : status_for(e), e.what(), e.where(), to_string(e.kind()));
    }
    auto s = std::make_shared<Session>();
    s->pattern = body;
    s->updated_at = now_iso();
    {
      std::lock_guard lock(mutex_);
      s->id = fresh_id();
      append(s->id, {{"op", "create"}, {"pattern", body}, {"params", s->params}, {"at", s->updated_at}});
      sessions_[s->id] = s;
    }
    reply(res, 201, {{"id", s->id}});
  });

  server.Get(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    std::lock_guard lock(mutex_);
    reply(res, 200, session_json(*s));
  });

  server.Put(R"(/sessions/([0-9a-f]+)/pattern)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    Json body;
    try {
      body = Json::parse(req.body);
      materialize(parse_pattern(body));
    } catch (const Json::parse_error&) {
      return reply_error(res, 422, "request body is not valid JSON", "", "schema");
    } catch (const Error& e) {
      return reply_error(res, status_for(e) == 404 ? 422 : status_for(e), e.what(), e.where(), to_string(e.kind()));
    }
    std::lock_guard lock(mutex_);
    if (s->busy) return reply_error(res, 409, "a simulation is running on this session");
    s->pattern = body;
    s->result.reset();
    ++s->generation;
    s->updated_at = now_iso();
    append(s->id, {{"op", "pattern"}, {"pattern", body}, {"at", s->updated_at}});
    reply(res, 200, session_json(*s));
  });

  server.Post(R"(/sessions/([0-9a-f]+)/simulate)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    Json body = Json::object();
    if (!req.body.empty()) {
      try {
        body = Json::parse(req.body);
      } catch (const Json::parse_error&) {
        return reply_error(res, 422, "request body is not valid JSON", "", "schema");
      }
    }
    Stage stage = Stage::Arap;
    Json pattern, params;
    int generation = 0;
    int nodes = 0;
    try {
      if (!body.is_object()) throw Error(ErrorKind::Schema, "expected an object", "/");
      for (const auto& [k, v] : body.items())
        if (k != "stage" && k != "params") throw Error(ErrorKind::Schema, "unknown field", "/" + k);
      if (body.contains("stage")) {
        if (!body["stage"].is_string()) throw Error(ErrorKind::Schema, "expected a string", "/stage");
        stage = parse_stage(body["stage"].get<std::string>());
      }
      {
        std::lock_guard lock(mutex_);
        pattern = s->pattern;
        params = body.contains("params") ? body["params"] : s->params;
      }
      const PatternDocument doc = parse_pattern(pattern);
      resolve_params(doc, params);
      const SmockingPattern p = materialize(doc);
      int stitched = 0;
      for (const auto& l : p.lines) stitched += static_cast<int>(l.vertex_ids.size());
      nodes = static_cast<int>(p.lines.size()) + p.vertex_count() - stitched;
    } catch (const Error& e) {
      return reply_error(res, 422, e.what(), e.where(), to_string(e.kind()));
    }

    {
      std::lock_guard lock(mutex_);
      if (s->busy) return reply_error(res, 409, "a simulation is already running on this session");
      s->busy = true;
      generation = s->generation;
      if (body.contains("params") && params != s->params) {
        s->params = params;
        append(s->id, {{"op", "params"}, {"params", params}, {"at", now_iso()}});
      }
    }

    if (nodes <= config_.sync_threshold) {
      Json out;
      int status = 200;
      try {
        out = run_simulation(s, pattern, params, stage, generation);
      } catch (const Error& e) {
        status = status_for(e);
        out = {{"error", e.what()}, {"kind", to_string(e.kind())}, {"pointer", e.where()}};
      }
      {
        std::lock_guard lock(mutex_);
        s->busy = false;
      }
      return reply(res, status, out);
    }

    std::lock_guard lock(mutex_);
    const std::string job_id = fresh_id();
    s->job = Job{job_id, "running", nullptr};
    workers_.emplace_back([this, s, pattern, params, stage, generation, job_id] {
      Json error = nullptr;
      try {
        run_simulation(s, pattern, params, stage, generation);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard inner(mutex_);
      s->busy = false;
      if (s->job && s->job->id == job_id) {
        s->job->state = error.is_null() ? "done" : "failed";
        s->job->error = error;
      }
    });
    reply(res, 202, {{"job_id", job_id}, {"state", "running"}});
  });

  server.Get(R"(/sessions/([0-9a-f]+)/job)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    std::lock_guard lock(mutex_);
    if (!s->job) return reply_error(res, 404, "no job");
    reply(res, 200, {{"job_id", s->job->id}, {"state", s->job->state}, {"error", s->job->error}});
  });

  server.Get(R"(/sessions/([0-9a-f]+)/result/mesh)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    const std::string variant = req.has_param("variant") ? req.get_param_value("variant") : "merged";
    const std::string color = req.has_param("color") ? req.get_param_value("color") : "none";
    std::filesystem::path file;
    {
      std::lock_guard lock(mutex_);
      if (!s->result) return reply_error(res, 404, "no result for this session");
      auto it = s->result->meshes.find(variant + "-" + color);
      if (it == s->result->meshes.end()) {
        if (s->result->meshes.empty()) return reply_error(res, 404, "result has no mesh (stopped before arap)");
        return reply_error(res, 422, "unknown variant or color");
      }
      file = it->second;
    }
    try {
      res.set_content(read_text(file), "text/plain");
    } catch (const Error& e) {
      reply_error(res, 500, e.what());
    }
  });

  server.Get(R"(/sessions/([0-9a-f]+)/result/diagnostics)", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    std::lock_guard lock(mutex_);
    if (!s->result) return reply_error(res, 404, "no result for this session");
    reply(res, 200, s->result->diagnostics);
  });

  server.Get(R"(/sessions/([0-9a-f]+)/result/stage)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    std::lock_guard lock(mutex_);
    if (!s->result) return reply_error(res, 404, "no result for this session");
    reply(res, 200, s->result->stage);
  });
}

bool DesignService::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  spdlog::info("listening on {}:{}", host, port);
  return server_->listen(host, port);
}

int DesignService::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error(ErrorKind::Io, "cannot bind " + host);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void DesignService::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace smocklab
