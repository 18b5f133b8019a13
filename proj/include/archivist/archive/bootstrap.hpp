#pragma once

#include <string_view>

#include "archivist/auth/password.hpp"
#include "archivist/domain/types.hpp"
#include "archivist/storage/store.hpp"

namespace archivist {

// A store is initialized once it holds a user account.
bool is_initialized(const storage::Reader& r);

struct BootstrapResult {
    UserId admin_user_id;
    RoleId administrator_role_id;
};

// Seeds the four privileges, the Administrator role holding all of them, the
// X-ray / CT scan / Mammography categories and the first administrator, in
// one transaction with every write audited as "system".
// Throws AlreadyInitialized, WeakPassword, FieldErrors.
BootstrapResult initialize_archive(storage::Store& store, const UserId& admin_user_id,
                                   std::string_view password, Timestamp now,
                                   unsigned password_iterations = auth::kDefaultPasswordIterations);

}  // namespace archivist
