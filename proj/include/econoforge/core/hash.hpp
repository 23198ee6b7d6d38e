#pragma once

#include <string>
#include <string_view>

namespace econoforge {

std::string sha1_hex(std::string_view data);
std::string sha256_hex(std::string_view data);

}  // namespace econoforge
