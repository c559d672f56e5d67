#include "plangen/task.hpp"

#include "plangen/array.hpp"

namespace plangen {

Task parse_task(const std::string& name) {
  if (name == "argument") return Task::kArgument;
  if (name == "wikipedia") return Task::kWikipedia;
  if (name == "abstract") return Task::kAbstract;
  throw Error("unknown task \"" + name + "\" (expected argument, wikipedia or abstract)");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::kArgument: return "argument";
    case Task::kWikipedia: return "wikipedia";
    case Task::kAbstract: return "abstract";
  }
  return "argument";
}

int style_arity(Task task) {
  switch (task) {
    case Task::kArgument: return 3;
    case Task::kWikipedia: return 4;
    case Task::kAbstract: return 1;
  }
  return 1;
}

std::size_t default_bank_cap(Task task) { return task == Task::kArgument ? 70 : 30; }
bool uses_global_style(Task task) { return task == Task::kWikipedia; }
bool encodes_title_by_sum(Task task) { return task == Task::kWikipedia; }

}  // namespace plangen
