#pragma once

// Deployment configuration, the versioned graph state and the single-writer
// correlation/enrichment pipeline shared by the CLI and the HTTP service.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lagraph/correlation.hpp"
#include "lagraph/enrichment.hpp"
#include "lagraph/graph.hpp"
#include "lagraph/logic.hpp"
#include "lagraph/ontology.hpp"

namespace lagraph {

inline constexpr int kApiFormatVersion = 1;

struct DeploymentConfig {
    std::filesystem::path rules;
    std::filesystem::path facts;
    std::filesystem::path ontology;
    std::filesystem::path host_bindings;
    std::filesystem::path impact_rules;
    std::string goal;
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::optional<std::filesystem::path> audit_log;
    std::size_t max_derived_facts = 100000;
    Confidence min_confidence = Confidence::CveConfirmed;
    bool one_node_per_impact_subtype = true;

    /// Relative paths are resolved against `base_dir`. Throws SchemaError.
    static DeploymentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
    static DeploymentConfig load(const std::filesystem::path& path);
};

struct GraphVersion {
    std::uint64_t version = 0;
    std::string digest;
    std::int64_t created_ms = 0;
    /// "generation" or the provoking hypothesis id.
    std::string event;
    std::shared_ptr<const AttackGraph> graph;
    std::optional<GraphDelta> delta;
};

/// Graph export with the version number attached.
nlohmann::json version_export(const GraphVersion& v);
/// Version metadata (and delta, if any) without the graph.
nlohmann::json version_summary(const GraphVersion& v);

struct AlertOutcome {
    Alert alert;
    std::vector<ExploitationHypothesis> hypotheses;
    std::vector<GraphDelta> deltas;
    /// Shortest path before the alert vs. after it.
    PathChange change = PathChange::Unchanged;
    std::uint64_t version = 0;
    std::string digest;

    std::size_t added_nodes() const;
    nlohmann::json to_json() const;
};

/// Holds the knowledge base, the ontology and the committed graph versions.
/// Alerts are processed one at a time in arrival order; readers only ever see
/// fully committed versions.
class Engine {
public:
    struct Inputs {
        KnowledgeBase kb;
        Atom goal;
        OntologyStore ontology;
        HostBindings bindings;
        EnrichmentPolicy policy;
        ChainOptions chain;
    };

    /// Runs forward chaining and builds version 1. Throws GoalNotDerivableError
    /// or any parse/validation error from the inputs.
    explicit Engine(Inputs inputs, std::shared_ptr<AuditLog> audit = nullptr);

    static Inputs load_inputs(const DeploymentConfig& config);

    std::shared_ptr<const GraphVersion> current() const;
    std::vector<std::shared_ptr<const GraphVersion>> history() const;
    const GraphVersion& initial() const { return *m_initial; }

    /// parse -> match -> enrich -> commit. Throws SchemaError for a malformed alert.
    AlertOutcome submit(std::string_view raw_alert);
    /// Same pipeline on a scratch copy of the current graph; nothing is committed or logged.
    AlertOutcome what_if(std::string_view raw_alert) const;

    /// Versions newer than `after`, waiting up to `timeout` for one to appear.
    std::vector<std::shared_ptr<const GraphVersion>> wait_for_versions(std::uint64_t after,
                                                                       std::chrono::milliseconds timeout) const;
    /// Wakes every waiter; subsequent waits return immediately.
    void shutdown();
    bool is_shut_down() const;

    const KnowledgeBase& kb() const noexcept { return m_inputs.kb; }
    const ChainResult& fixpoint() const noexcept { return m_fixpoint; }
    const OntologyStore& ontology() const noexcept { return m_inputs.ontology; }
    const HostBindings& bindings() const noexcept { return m_inputs.bindings; }
    const EnrichmentPolicy& policy() const noexcept { return m_inputs.policy; }
    const Atom& goal() const noexcept { return m_inputs.goal; }
    AuditLog* audit() const noexcept { return m_audit.get(); }

private:
    struct PipelineHooks {
        std::function<void(const std::vector<ExploitationHypothesis>&)> on_hypotheses;
        std::function<void(const ExploitationHypothesis&, const GraphDelta&, const AttackGraph&)> on_delta;
    };

    AlertOutcome run_pipeline(const Alert& alert, const AttackGraph& start, const PipelineHooks& hooks) const;
    void commit(const ExploitationHypothesis& h, const GraphDelta& delta, const AttackGraph& graph);

    Inputs m_inputs;
    ChainResult m_fixpoint;
    std::shared_ptr<AuditLog> m_audit;
    std::shared_ptr<const GraphVersion> m_initial;

    std::mutex m_write_mutex;
    mutable std::mutex m_state_mutex;
    mutable std::condition_variable m_versions_cv;
    std::vector<std::shared_ptr<const GraphVersion>> m_versions;
    bool m_shutdown = false;
};

/// Alert documents from a replay file: either one alert per line, or an audit
/// log whose `alert` events carry the raw documents. For an audit log only the
/// alerts after the last `generation` event are kept. Blank lines are skipped.
std::vector<std::string> read_replay_alerts(std::string_view text);

enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitGoalUnderivable = 2 };

/// Builds the graph and writes `graph.json` and `graph.dot` into `out_dir`.
int cmd_generate(const DeploymentConfig& config, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err);
/// Regenerates the graph and pushes every alert of `alerts` through the pipeline.
/// When `out_dir` is set, writes `graph.json`, `graph.dot` and `deltas.ndjson` there.
int cmd_replay(const DeploymentConfig& config, const std::filesystem::path& alerts,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);
/// Loads and checks every configured input without writing anything.
int cmd_validate(const DeploymentConfig& config, std::ostream& out, std::ostream& err);

} // namespace lagraph
