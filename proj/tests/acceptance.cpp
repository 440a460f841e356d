#include <gtest/gtest.h>

#include <filesystem>
#include <iostream>

#include "photobio_app/acceptance.hpp"

namespace app = photobio::app;

namespace {

app::Workbench& bench() {
  static app::Workbench wb;
  return wb;
}

void check(const app::CriterionResult& r) {
  std::cout << app::format_result(r) << std::endl;
  EXPECT_TRUE(r.passed);
}

}  // namespace

TEST(Acceptance, Criterion01) { check(app::criterion_1(bench())); }
TEST(Acceptance, Criterion02) { check(app::criterion_2(bench())); }
TEST(Acceptance, Criterion03) { check(app::criterion_3(bench())); }
TEST(Acceptance, Criterion04) { check(app::criterion_4(bench())); }
TEST(Acceptance, Criterion05) { check(app::criterion_5(bench())); }
TEST(Acceptance, Criterion06) { check(app::criterion_6(bench())); }
TEST(Acceptance, Criterion07) { check(app::criterion_7(bench())); }
TEST(Acceptance, Criterion08) { check(app::criterion_8(bench())); }
TEST(Acceptance, Criterion09) { check(app::criterion_9(bench())); }

TEST(Acceptance, Criterion10) {
  const auto dir = std::filesystem::temp_directory_path() / "photobio_acceptance_bundles";
  check(app::criterion_10(bench(), dir));
}
