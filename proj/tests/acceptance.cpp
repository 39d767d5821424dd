// One PASS/FAIL line per acceptance criterion; non-zero exit on any failure.

#include <cstdio>
#include <iostream>

#include "hmono/verify.hpp"

int main() {
  hmono::verify::Context ctx;
  bool ok = true;
  for (int id : hmono::verify::suite_members("all")) {
    const auto r = hmono::verify::run_criterion(id, ctx);
    std::cout << r.line() << std::endl;
    ok = ok && r.pass();
  }
  std::cout << (ok ? "ALL PASS" : "SOME FAILED") << std::endl;
  return ok ? 0 : 1;
}
