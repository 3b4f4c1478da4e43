// lagraph: generate, replay, serve and validate from a deployment config.

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lagraph/engine.hpp"
#include "lagraph/server.hpp"

namespace {

using lagraph::DeploymentConfig;

std::optional<DeploymentConfig> load_config(const std::string& path, const std::string& goal) {
    try {
        DeploymentConfig config = DeploymentConfig::load(path);
        if (!goal.empty()) config.goal = goal;
        return config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return std::nullopt;
    }
}

int serve(const DeploymentConfig& config, const std::string& listen) {
    std::string host = config.listen_host;
    int port = config.listen_port;
    if (!listen.empty()) {
        const auto colon = listen.rfind(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
            host = listen.substr(0, colon);
            port = std::stoi(listen.substr(colon + 1));
        } catch (const std::exception&) {
            std::cerr << "error: --listen expects host:port\n";
            return lagraph::kExitInputError;
        }
    }

    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<lagraph::Engine> engine;
    try {
        std::shared_ptr<lagraph::AuditLog> audit;
        if (config.audit_log) audit = std::make_shared<lagraph::AuditLog>(*config.audit_log);
        engine = std::make_unique<lagraph::Engine>(lagraph::Engine::load_inputs(config), audit);
    } catch (const lagraph::GoalNotDerivableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lagraph::kExitGoalUnderivable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lagraph::kExitInputError;
    }

    lagraph::HttpService service(*engine);
    int bound = 0;
    try {
        bound = service.start(host, port);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lagraph::kExitInputError;
    }
    std::cout << "listening on " << host << ":" << bound << " (version " << engine->current()->version
              << ", digest " << engine->current()->digest << ")" << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "shutting down" << std::endl;
    engine->shutdown();
    service.stop();
    return lagraph::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Logical attack-graph generation, alert correlation and enrichment"};
    app.require_subcommand(1);

    std::string config_path;
    std::string goal;
    app.add_option("--config", config_path, "Deployment config (JSON)")->required();
    app.add_option("--goal", goal, "Goal atom, overrides the config");

    std::string out_dir = ".";
    auto* generate = app.add_subcommand("generate", "Build the attack graph and write graph.json and graph.dot");
    generate->add_option("--out", out_dir, "Output directory");

    std::string alerts_path;
    std::string replay_out;
    auto* replay = app.add_subcommand("replay", "Push an alert file or audit log through the pipeline");
    replay->add_option("alerts", alerts_path, "Alerts (one JSON document per line) or an audit log")->required();
    replay->add_option("--out", replay_out, "Write the final graph and deltas.ndjson here");

    std::string listen;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--listen", listen, "host:port, overrides the config");

    auto* validate = app.add_subcommand("validate", "Load and check every configured input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lagraph::kExitInputError;
    }

    auto config = load_config(config_path, goal);
    if (!config) return lagraph::kExitInputError;

    if (*generate) return lagraph::cmd_generate(*config, out_dir, std::cout, std::cerr);
    if (*replay) {
        std::optional<std::filesystem::path> out;
        if (!replay_out.empty()) out = replay_out;
        return lagraph::cmd_replay(*config, alerts_path, out, std::cout, std::cerr);
    }
    if (*serve_cmd) return serve(*config, listen);
    if (*validate) return lagraph::cmd_validate(*config, std::cout, std::cerr);
    return lagraph::kExitInputError;
}
