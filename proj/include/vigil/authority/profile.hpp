#pragma once

#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "vigil/ledger/account.hpp"

namespace vigil::authority {

using ledger::Address;

enum class EntityRole : std::uint8_t { Fog = 1, Edge = 2, Cloud = 3 };
enum class EntityStatus : std::uint8_t { Pending = 1, Verified = 2, Revoked = 3 };

inline const char* role_name(EntityRole r) {
    switch (r) {
        case EntityRole::Fog: return "fog";
        case EntityRole::Edge: return "edge";
        case EntityRole::Cloud: return "cloud";
    }
    return "?";
}

inline std::optional<EntityRole> parse_role(std::string_view s) {
    if (s == "fog") return EntityRole::Fog;
    if (s == "edge") return EntityRole::Edge;
    if (s == "cloud") return EntityRole::Cloud;
    return std::nullopt;
}

inline const char* status_name(EntityStatus s) {
    switch (s) {
        case EntityStatus::Pending: return "pending";
        case EntityStatus::Verified: return "verified";
        case EntityStatus::Revoked: return "revoked";
    }
    return "?";
}

struct ProfileEntry {
    Address vid{};
    std::string display_name;
    EntityRole role = EntityRole::Edge;
    EntityStatus status = EntityStatus::Pending;
    std::int64_t registered_at_ms = 0;
};

class RegistrationError : public std::runtime_error {
public:
    enum class Kind { Duplicate };
    RegistrationError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

enum class DenyReason : std::uint8_t { Unknown, Revoked, NotVerified, WrongRole };

struct PermissionDecision {
    bool granted = false;
    DenyReason reason = DenyReason::Unknown;
};

inline const char* deny_reason_name(DenyReason r) {
    switch (r) {
        case DenyReason::Unknown: return "Unknown";
        case DenyReason::Revoked: return "Revoked";
        case DenyReason::NotVerified: return "NotVerified";
        case DenyReason::WrongRole: return "WrongRole";
    }
    return "?";
}

// The cloud's global profile database. Identity verification is an
// allowlist of VIDs; entries off the list stay Pending.
class ProfileDb {
public:
    ProfileDb() = default;

    void set_allowlist(std::set<Address> allow) { allowlist_ = std::move(allow); }

    void load_allowlist_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read allowlist: " + path);
        std::set<Address> allow;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
                line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            allow.insert(ledger::address_from_hex(line));
        }
        allowlist_ = std::move(allow);
    }

    void attach_journal(const std::string& path) {
        std::lock_guard lk(m_);
        journal_.open(path, std::ios::app);
        if (!journal_) throw std::runtime_error("cannot open profile journal: " + path);
    }

    void replay_journal(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read profile journal: " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            apply_journal_line(line);
        }
    }

    ProfileEntry register_entity(const Address& vid, const std::string& display_name,
                                 EntityRole role, std::int64_t now_ms) {
        std::lock_guard lk(m_);
        if (entries_.contains(vid))
            throw RegistrationError(RegistrationError::Kind::Duplicate,
                                    "vid already registered: " + ledger::address_hex(vid));
        ProfileEntry e;
        e.vid = vid;
        e.display_name = display_name;
        e.role = role;
        e.status = allowlist_.contains(vid) ? EntityStatus::Verified : EntityStatus::Pending;
        e.registered_at_ms = now_ms;
        entries_.emplace(vid, e);
        journal_append("REG " + ledger::address_hex(vid) + " " + role_name(role) + " " +
                       status_name(e.status) + " " + std::to_string(now_ms) + " " + display_name);
        return e;
    }

    void set_status(const Address& vid, EntityStatus status) {
        std::lock_guard lk(m_);
        auto it = entries_.find(vid);
        if (it == entries_.end()) throw std::runtime_error("unknown vid");
        it->second.status = status;
        journal_append("STATUS " + ledger::address_hex(vid) + " " + status_name(status));
    }

    void revoke(const Address& vid) { set_status(vid, EntityStatus::Revoked); }

    std::optional<ProfileEntry> lookup(const Address& vid) const {
        std::lock_guard lk(m_);
        auto it = entries_.find(vid);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    // Record permission goes only to verified fog entities.
    PermissionDecision decide_record_permission(const Address& vid) const {
        std::lock_guard lk(m_);
        auto it = entries_.find(vid);
        if (it == entries_.end()) return {false, DenyReason::Unknown};
        const ProfileEntry& e = it->second;
        if (e.status == EntityStatus::Revoked) return {false, DenyReason::Revoked};
        if (e.role != EntityRole::Fog) return {false, DenyReason::WrongRole};
        if (e.status != EntityStatus::Verified) return {false, DenyReason::NotVerified};
        return {true, DenyReason::Unknown};
    }

    std::size_t size() const {
        std::lock_guard lk(m_);
        return entries_.size();
    }

private:
    void apply_journal_line(const std::string& line) {
        std::istringstream ss(line);
        std::string op;
        ss >> op;
        if (op == "REG") {
            std::string vid_hex, role_s, status_s, ts_s;
            ss >> vid_hex >> role_s >> status_s >> ts_s;
            std::string name;
            std::getline(ss, name);
            if (!name.empty() && name.front() == ' ') name.erase(0, 1);
            ProfileEntry e;
            e.vid = ledger::address_from_hex(vid_hex);
            auto role = parse_role(role_s);
            if (!role) throw std::runtime_error("bad journal role");
            e.role = *role;
            e.status = status_s == "verified"  ? EntityStatus::Verified
                       : status_s == "revoked" ? EntityStatus::Revoked
                                               : EntityStatus::Pending;
            e.registered_at_ms = std::stoll(ts_s);
            e.display_name = name;
            entries_.emplace(e.vid, e);
        } else if (op == "STATUS") {
            std::string vid_hex, status_s;
            ss >> vid_hex >> status_s;
            auto it = entries_.find(ledger::address_from_hex(vid_hex));
            if (it == entries_.end()) throw std::runtime_error("journal status for unknown vid");
            it->second.status = status_s == "verified"  ? EntityStatus::Verified
                                : status_s == "revoked" ? EntityStatus::Revoked
                                                        : EntityStatus::Pending;
        } else {
            throw std::runtime_error("unknown profile journal entry");
        }
    }

    void journal_append(const std::string& entry) {
        if (journal_.is_open()) {
            journal_ << entry << '\n';
            journal_.flush();
        }
    }

    mutable std::mutex m_;
    std::map<Address, ProfileEntry> entries_;
    std::set<Address> allowlist_;
    std::ofstream journal_;
};

}  // namespace vigil::authority
