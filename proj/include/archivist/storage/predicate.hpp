#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "archivist/storage/entity_kind.hpp"

namespace archivist::storage {

// Conjunction of field-level clauses. An empty predicate matches every
// record. String comparisons apply to string-valued fields; for any other
// value the clause compares against the value's JSON text.
struct Predicate {
    enum class Op {
        Equals,
        // ASCII case-insensitive equality.
        EqualsFolded,
        // ASCII case-insensitive substring containment.
        Contains,
        IsNull,
    };

    struct Clause {
        std::string field;
        Op op;
        std::string value;
    };

    std::vector<Clause> clauses;

    Predicate& where(std::string field, Op op, std::string value = {}) {
        clauses.push_back({std::move(field), op, std::move(value)});
        return *this;
    }

    static Predicate equals(std::string field, std::string value) {
        return Predicate{}.where(std::move(field), Op::Equals, std::move(value));
    }

    // Throws UnknownField if a clause names a field the kind does not have.
    void check(EntityKind kind) const;
    bool matches(const nlohmann::json& record) const;
};

std::string fold_ascii(std::string_view s);

}  // namespace archivist::storage
