#pragma once

#include <cstddef>
#include <string>

namespace plangen {

enum class Task { kArgument, kWikipedia, kAbstract };

Task parse_task(const std::string& name);
std::string task_name(Task task);
// argument 3 (claim/premise/functional), wikipedia 4 length buckets,
// abstract 1 (style disabled).
int style_arity(Task task);
std::size_t default_bank_cap(Task task);
bool uses_global_style(Task task);
bool encodes_title_by_sum(Task task);

}  // namespace plangen
