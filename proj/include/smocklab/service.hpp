#pragma once

#include "smocklab/io.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace smocklab {

struct ServiceConfig {
  std::filesystem::path data_dir = "smocklab-data";
  int sync_threshold = 200;  // smocked-graph nodes solved inline
  std::string cors_origin = "*";
};

/// Session store plus simulation jobs behind an HTTP API. Sessions persist as
/// append-only JSON-lines logs in data_dir and are replayed on start.
class DesignService {
 public:
  explicit DesignService(ServiceConfig config);
  ~DesignService();

  DesignService(const DesignService&) = delete;
  DesignService& operator=(const DesignService&) = delete;

  /// Registers every route on `server`.
  void mount(httplib::Server& server);

  /// Binds and serves until stop(); returns false if the bind fails.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  /// Blocks until no asynchronous job is running.
  void wait_idle();

 private:
  struct Result {
    Json diagnostics;
    Json stage;
    std::map<std::string, std::filesystem::path> meshes;  // "<variant>-<color>" -> file
  };
  struct Job {
    std::string id;
    std::string state;  // running | done | failed
    Json error;
  };
  struct Session {
    std::string id;
    Json pattern;
    Json params = Json::object();
    std::optional<Result> result;
    std::string updated_at;
    bool busy = false;
    int generation = 0;
    std::optional<Job> job;
  };

  void replay();
  void append(const std::string& id, const Json& record);
  std::string fresh_id();
  std::shared_ptr<Session> find(const std::string& id);
  Json session_json(const Session& s) const;
  Json run_simulation(const std::shared_ptr<Session>& s, const Json& pattern, const Json& params, Stage stage,
                      int generation);

  ServiceConfig config_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::thread> workers_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

}  // namespace smocklab
