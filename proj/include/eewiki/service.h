#pragma once

// JSON over HTTP. Endpoints (all bodies application/json):
//
//   GET  /api/rulebases
//   GET  /api/rulebases/{id}
//   PUT  /api/rulebases/{id}                 If-Match: <revision>, {"source": ...}
//   POST /api/rulebases/{id}/validate        optional {"source": ...}
//   GET  /api/rulebases/{id}/menu
//   POST /api/rulebases/{id}/menu/search     {"text": ...}
//   POST /api/rulebases/{id}/query           {"pattern": ..., "constraints": [...]}
//   GET  /api/rulebases/{id}/explain/node/{hash}
//   POST /api/rulebases/{id}/explain         {"goal": ..., "values": {...}}
//   POST /api/rulebases/{id}/sql             {"pattern": ..., "mappings": ...}
//
// Errors are {"code", "message", "details"?}. Files under ui_dir are served
// at /.

#include <map>
#include <memory>
#include <string>

#include "eewiki/workspace.h"

namespace ee {

// HTTP status for a domain error code.
int http_status(const std::string& code);

class Service {
 public:
  explicit Service(WorkspaceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Workspace& workspace();

  struct Reply {
    int status = 200;
    std::string body;
  };
  // The request handler without the network; header names are lowercase.
  Reply handle(const std::string& method, const std::string& path, const std::string& body = {},
               const std::map<std::string, std::string>& headers = {}) const;

  // Blocks until stop(). False when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread.
  int start(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ee
