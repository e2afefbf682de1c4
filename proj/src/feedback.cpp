#include "joininfer/feedback.hpp"

#include <fstream>

#include <fcntl.h>
#include <unistd.h>

namespace joininfer {

using nlohmann::json;

std::string_view to_string(FeedbackAction action) {
    switch (action) {
        case FeedbackAction::Confirm: return "confirm";
        case FeedbackAction::Reject: return "reject";
        case FeedbackAction::Override: return "override";
        case FeedbackAction::DefineComposite: return "define-composite";
    }
    return "confirm";
}

std::optional<FeedbackAction> parse_feedback_action(std::string_view text) {
    for (auto a : {FeedbackAction::Confirm, FeedbackAction::Reject, FeedbackAction::Override,
                   FeedbackAction::DefineComposite}) {
        if (to_string(a) == text) return a;
    }
    return std::nullopt;
}

std::string_view to_string(TrainMode mode) { return mode == TrainMode::Full ? "full" : "incremental"; }

std::optional<TrainMode> parse_train_mode(std::string_view text) {
    if (text == "full") return TrainMode::Full;
    if (text == "incremental") return TrainMode::Incremental;
    return std::nullopt;
}

json record_to_json(const FeedbackRecord& r) {
    return {{"ind_id", r.ind_id},
            {"action", std::string(to_string(r.action))},
            {"payload", r.payload},
            {"timestamp", r.timestamp},
            {"actor", r.actor}};
}

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorKind::InvalidInput, message);
}

ColumnRef ref_from_payload(const json& j) {
    require(j.is_object() && j.contains("table") && j.contains("column") && j.at("table").is_string() &&
                j.at("column").is_string(),
            "column reference needs string 'table' and 'column'");
    ColumnRef ref{j.at("table").get<std::string>(), j.at("column").get<std::string>()};
    require(!ref.table.empty() && !ref.column.empty(), "column reference has an empty part");
    return ref;
}

void check_payload(const FeedbackRecord& r) {
    if (r.action == FeedbackAction::Override) {
        require(r.payload.is_object() && r.payload.contains("pairs") && r.payload.at("pairs").is_array() &&
                    !r.payload.at("pairs").empty(),
                "override needs a non-empty 'pairs' list");
        for (const auto& p : r.payload.at("pairs")) {
            require(p.is_object() && p.contains("fk") && p.contains("pk"), "override pair needs 'fk' and 'pk'");
            ref_from_payload(p.at("fk"));
            ref_from_payload(p.at("pk"));
        }
        if (r.payload.contains("replaces")) require(r.payload.at("replaces").is_string(), "'replaces' must be a string");
    } else if (r.action == FeedbackAction::DefineComposite) {
        require(r.payload.is_object() && r.payload.contains("table") && r.payload.at("table").is_string() &&
                    r.payload.contains("columns") && r.payload.at("columns").is_array(),
                "define-composite needs 'table' and 'columns'");
        const auto& cols = r.payload.at("columns");
        require(cols.size() >= 2, "a composite key needs at least two columns");
        std::set<std::string> seen;
        for (const auto& c : cols) {
            require(c.is_string() && !c.get<std::string>().empty(), "composite key columns must be non-empty strings");
            require(seen.insert(to_lower(c.get<std::string>())).second, "composite key repeats a column");
        }
    } else {
        require(!r.ind_id.empty(), "confirm and reject need an IND id");
    }
}

}  // namespace

FeedbackRecord record_from_json(const json& j) {
    require(j.is_object(), "feedback record must be an object");
    FeedbackRecord r;
    require(j.contains("action") && j.at("action").is_string(), "feedback record lacks an action");
    const auto action = parse_feedback_action(j.at("action").get<std::string>());
    require(action.has_value(), "unknown feedback action '" + j.at("action").get<std::string>() + "'");
    r.action = *action;
    r.ind_id = j.value("ind_id", std::string{});
    r.payload = j.contains("payload") ? j.at("payload") : json(nullptr);
    r.timestamp = j.value("timestamp", std::string{});
    r.actor = j.value("actor", std::string{});
    check_payload(r);
    if (r.action == FeedbackAction::Override) {
        require(r.ind_id == user_ind_from_payload(r.payload).id(), "override id does not match its column pairs");
    }
    return r;
}

std::optional<std::vector<std::pair<ColumnRef, ColumnRef>>> parse_ind_id(std::string_view id) {
    std::vector<std::pair<ColumnRef, ColumnRef>> out;
    auto split_ref = [](std::string_view s) -> std::optional<ColumnRef> {
        const auto dot = s.find('.');
        if (dot == std::string_view::npos || dot == 0 || dot + 1 >= s.size()) return std::nullopt;
        return ColumnRef{std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
    };
    size_t start = 0;
    while (start <= id.size()) {
        size_t end = id.find('+', start);
        if (end == std::string_view::npos) end = id.size();
        const std::string_view part = id.substr(start, end - start);
        const auto arrow = part.find("->");
        if (arrow == std::string_view::npos) return std::nullopt;
        auto fk = split_ref(part.substr(0, arrow));
        auto pk = split_ref(part.substr(arrow + 2));
        if (!fk || !pk) return std::nullopt;
        out.emplace_back(std::move(*fk), std::move(*pk));
        start = end + 1;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

InclusionDependency user_ind_from_payload(const json& payload) {
    InclusionDependency ind;
    const auto& pairs = payload.at("pairs");
    ind.fk = ref_from_payload(pairs.at(0).at("fk"));
    ind.pk = ref_from_payload(pairs.at(0).at("pk"));
    for (size_t i = 1; i < pairs.size(); ++i) {
        ind.extra_pairs.emplace_back(ref_from_payload(pairs[i].at("fk")), ref_from_payload(pairs[i].at("pk")));
    }
    ind.origin = Origin::User;
    ind.status = IndStatus::UserDefined;
    ind.score = 1.0;
    ind.rationale = "defined by a reviewer";
    return ind;
}

// --- log ------------------------------------------------------------------------------

FeedbackLog::FeedbackLog(std::filesystem::path path) : path_(std::move(path)) {}

void FeedbackLog::append(const FeedbackRecord& record) {
    std::lock_guard lock(mutex_);
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    const std::string line = record_to_json(record).dump() + "\n";
    const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw Error(ErrorKind::Service, "cannot open feedback log " + path_.string());
    size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
        if (n <= 0) {
            ::close(fd);
            throw Error(ErrorKind::Service, "write to feedback log failed");
        }
        written += static_cast<size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

std::vector<FeedbackRecord> FeedbackLog::read() const {
    std::vector<FeedbackRecord> out;
    std::ifstream in(path_);
    if (!in) return out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::InvalidInput,
                        "corrupt feedback log record at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// --- state ----------------------------------------------------------------------------

void FeedbackState::apply(const FeedbackRecord& r) {
    ++records;
    switch (r.action) {
        case FeedbackAction::Confirm: statuses[r.ind_id] = IndStatus::Confirmed; break;
        case FeedbackAction::Reject: statuses[r.ind_id] = IndStatus::Rejected; break;
        case FeedbackAction::Override: {
            InclusionDependency ind = user_ind_from_payload(r.payload);
            const std::string id = ind.id();
            user_inds.insert_or_assign(id, std::move(ind));
            statuses[id] = IndStatus::UserDefined;
            if (r.payload.contains("replaces")) statuses[r.payload.at("replaces").get<std::string>()] = IndStatus::Rejected;
            break;
        }
        case FeedbackAction::DefineComposite:
            keys[to_lower(r.payload.at("table").get<std::string>())] =
                r.payload.at("columns").get<std::vector<std::string>>();
            break;
    }
    excluded.clear();
    for (const auto& [id, status] : statuses) {
        if (status != IndStatus::Confirmed) continue;
        if (auto pairs = parse_ind_id(id)) excluded.insert(make_table_pair(pairs->front().first.table, pairs->front().second.table));
    }
}

json FeedbackState::to_json() const {
    json s = json::object();
    for (const auto& [id, st] : statuses) s[id] = std::string(joininfer::to_string(st));
    json u = json::array();
    for (const auto& [id, ind] : user_inds) u.push_back(id);
    json k = json::object();
    for (const auto& [t, cols] : keys) k[t] = cols;
    json e = json::array();
    for (const auto& [a, b] : excluded) e.push_back({a, b});
    return {{"statuses", s}, {"user_inds", u}, {"composite_keys", k}, {"excluded_pairs", e}, {"records", records}};
}

FeedbackState replay(std::span<const FeedbackRecord> records) {
    FeedbackState state;
    for (const auto& r : records) state.apply(r);
    return state;
}

void check_record(const FeedbackRecord& record, std::span<const InclusionDependency> known) {
    check_payload(record);
    if (record.action == FeedbackAction::Confirm || record.action == FeedbackAction::Reject) {
        const bool found = std::any_of(known.begin(), known.end(),
                                       [&](const InclusionDependency& i) { return i.id() == record.ind_id; });
        if (!found) throw Error(ErrorKind::NotFound, "unknown IND id '" + record.ind_id + "'");
    }
    if (record.action == FeedbackAction::Override && record.payload.contains("replaces")) {
        const std::string replaced = record.payload.at("replaces").get<std::string>();
        const bool found = std::any_of(known.begin(), known.end(),
                                       [&](const InclusionDependency& i) { return i.id() == replaced; });
        if (!found) throw Error(ErrorKind::NotFound, "override replaces unknown IND id '" + replaced + "'");
    }
}

std::vector<InclusionDependency> overlay_feedback(std::vector<InclusionDependency> inds, const FeedbackState& state) {
    for (const auto& [id, ind] : state.user_inds) {
        const bool present = std::any_of(inds.begin(), inds.end(), [&](const auto& i) { return i.id() == id; });
        if (!present) inds.push_back(ind);
    }
    for (auto& ind : inds) {
        if (auto it = state.statuses.find(ind.id()); it != state.statuses.end()) ind.status = it->second;
    }
    std::sort(inds.begin(), inds.end(), [](const auto& a, const auto& b) { return a.id() < b.id(); });
    assign_default_edges(inds);
    return inds;
}

PipelineOverrides retrain_overrides(const FeedbackState& state, TrainMode mode,
                                    std::span<const InclusionDependency> previous) {
    PipelineOverrides o;
    o.statuses = state.statuses;
    o.keys = state.keys;
    for (const auto& [id, ind] : state.user_inds) o.carried.push_back(ind);
    if (mode == TrainMode::Incremental) {
        o.excluded = state.excluded;
        for (const auto& ind : previous) {
            if (ind.origin == Origin::User) continue;
            if (o.excluded.contains(ind.table_pair())) o.carried.push_back(ind);
        }
    }
    return o;
}

}  // namespace joininfer
