// SPDX-License-Identifier: Apache-2.0
//
// ztc: zero-touch commissioning controller.
//   ztc serve --topology topo.json [--port 8080] [--data-dir ./data]
//   ztc order --file order.json [--sync] [--url http://127.0.0.1:8080]
//   ztc oracle --topology topo.json --order order.json
//   ztc scenario --topology topo.json --file script.json

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "ztc/api_service.hpp"
#include "ztc/error.hpp"
#include "ztc/json_util.hpp"
#include "ztc/scenario.hpp"

namespace {

ztc::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const std::string& topologyPath, int port, const std::string& dataDir, int refreshSeconds,
          int sampleMs) {
  ztc::SteadyClock clock;
  ztc::EngineOptions options;
  options.dataDir = dataDir;
  ztc::DeploymentEngine engine(ztc::load_topology_file(topologyPath), clock, options);
  ztc::UsageSampler sampler(engine, std::chrono::milliseconds(sampleMs));
  sampler.start();
  ztc::ApiService api(engine, &sampler);
  ztc::HttpServer server(api);
  const int bound = server.bind("0.0.0.0", port);

  std::mutex m;
  std::condition_variable cv;
  bool done = false;
  std::thread refresher([&] {
    std::unique_lock lock(m);
    while (!cv.wait_for(lock, std::chrono::seconds(refreshSeconds), [&] { return done; })) {
      lock.unlock();
      engine.refresh_resource_catalog();
      lock.lock();
    }
  });

  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "ztc listening on port " << bound << "\n";
  server.listen();
  g_server = nullptr;

  {
    std::lock_guard lock(m);
    done = true;
  }
  cv.notify_all();
  refresher.join();
  sampler.stop();
  engine.wait_idle();
  return 0;
}

int post_order(const std::string& file, bool sync, const std::string& url) {
  const std::string body = ztc::json_util::read_file(file);
  httplib::Client client(url);
  auto res = client.Post(sync ? "/api/orders?sync=true" : "/api/orders", body, "application/json");
  if (!res) {
    std::cerr << "request failed: " << httplib::to_string(res.error()) << "\n";
    return 2;
  }
  std::cout << res->body << "\n";
  return res->status >= 200 && res->status < 300 ? 0 : 1;
}

int oracle(const std::string& topologyPath, const std::string& orderPath) {
  const auto topology = ztc::load_topology_file(topologyPath);
  const auto order = ztc::parse_order(ztc::json_util::read_file(orderPath));
  const auto catalog = ztc::build_resource_catalog(topology, 0);
  std::cout << ztc::selection_to_json(ztc::oracle_select(order, catalog, topology)).dump(2) << "\n";
  return 0;
}

int scenario(const std::string& topologyPath, const std::string& scriptPath) {
  ztc::SteadyClock clock;
  ztc::DeploymentEngine engine(ztc::load_topology_file(topologyPath), clock);
  const auto script = ztc::json_util::parse(ztc::json_util::read_file(scriptPath));
  for (const auto& step : ztc::run_scenario(engine, script)) std::cout << step.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-touch commissioning controller for O-RAN units"};
  app.require_subcommand(1);

  std::string topology;
  std::string dataDir = "./data";
  int port = 8080;
  int refreshSeconds = 5;
  int sampleMs = 1000;
  auto* serveCmd = app.add_subcommand("serve", "Run the REST controller");
  serveCmd->add_option("--topology", topology, "Topology JSON")->envname("ZTC_TOPOLOGY")->required();
  serveCmd->add_option("--port", port, "Listen port")->envname("ZTC_PORT");
  serveCmd->add_option("--data-dir", dataDir, "Catalog, manifest and trace directory")->envname("ZTC_DATA_DIR");
  serveCmd->add_option("--refresh-seconds", refreshSeconds, "Resource catalog refresh period")
      ->check(CLI::PositiveNumber);
  serveCmd->add_option("--sample-ms", sampleMs, "Usage sampling period")->check(CLI::PositiveNumber);

  std::string orderFile;
  bool sync = false;
  std::string url = "http://127.0.0.1:8080";
  auto* orderCmd = app.add_subcommand("order", "Submit a service order to a running controller");
  orderCmd->add_option("--file", orderFile, "Order JSON")->required();
  orderCmd->add_flag("--sync", sync, "Wait for the pipeline to finish");
  orderCmd->add_option("--url", url, "Controller base URL");

  std::string oracleOrder;
  auto* oracleCmd = app.add_subcommand("oracle", "Print the exhaustive-search placement for an order");
  oracleCmd->add_option("--topology", topology, "Topology JSON")->envname("ZTC_TOPOLOGY")->required();
  oracleCmd->add_option("--order", oracleOrder, "Order JSON")->required();

  std::string scriptFile;
  auto* scenarioCmd = app.add_subcommand("scenario", "Replay a script of orders and teardowns");
  scenarioCmd->add_option("--topology", topology, "Topology JSON")->envname("ZTC_TOPOLOGY")->required();
  scenarioCmd->add_option("--file", scriptFile, "Scenario JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serveCmd) return serve(topology, port, dataDir, refreshSeconds, sampleMs);
    if (*orderCmd) return post_order(orderFile, sync, url);
    if (*oracleCmd) return oracle(topology, oracleOrder);
    if (*scenarioCmd) return scenario(topology, scriptFile);
  } catch (const ztc::Error& e) {
    std::cerr << "error (" << ztc::to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  }
  return 0;
}
