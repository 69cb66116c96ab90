#include <gtest/gtest.h>

#include <cdist/item_list.hpp>

#include <string>
#include <vector>

using namespace cdist;

using Items = std::vector<std::string>;

TEST(ParseItemList, MarkerStyles) {
  EXPECT_EQ(parse_item_list("- one\n- two\n"), (Items{"one", "two"}));
  EXPECT_EQ(parse_item_list("* one\n* two"), (Items{"one", "two"}));
  EXPECT_EQ(parse_item_list("\xE2\x80\xA2 one\n\xE2\x80\xA2 two\n"), (Items{"one", "two"}));
  EXPECT_EQ(parse_item_list("1. one\n2. two\n10. ten\n"), (Items{"one", "two", "ten"}));
  EXPECT_EQ(parse_item_list("1) one\n2) two\n"), (Items{"one", "two"}));
  EXPECT_EQ(parse_item_list("1.\tone tab\n"), (Items{"one tab"}));
}

TEST(ParseItemList, SurroundingProseIsIgnored) {
  std::string raw =
      "Sure, here are the reasons:\n"
      "1. missed the unit conversion\n"
      "2. answered the subquestion\n"
      "Hope that helps!\n";
  EXPECT_EQ(parse_item_list(raw), (Items{"missed the unit conversion", "answered the subquestion"}));
}

TEST(ParseItemList, IndentedContinuationJoins) {
  std::string raw =
      "- first item\n"
      "  continues here\n"
      "\tand here\n"
      "- second\n";
  EXPECT_EQ(parse_item_list(raw), (Items{"first item continues here and here", "second"}));
}

TEST(ParseItemList, IndentedMarkedLinesAreItems) {
  EXPECT_EQ(parse_item_list("   - indented item\n     - deeper item\n"),
            (Items{"indented item", "deeper item"}));
}

TEST(ParseItemList, StackedMarkersAreStripped) {
  EXPECT_EQ(parse_item_list("- - doubled\n* 1. mixed\n"), (Items{"doubled", "mixed"}));
}

TEST(ParseItemList, CrlfAndBlankLines) {
  EXPECT_EQ(parse_item_list("- one\r\n\r\n- two\r\n"), (Items{"one", "two"}));
}

TEST(ParseItemList, NegativeNumbersAndEmphasisAreNotMarkers) {
  // "-5 apples" and "*bold*" have no whitespace after the would-be marker.
  EXPECT_EQ(parse_item_list("-5 apples\n*bold* text\n"), Items{});
  EXPECT_EQ(parse_item_list("- -5 is the answer\n"), (Items{"-5 is the answer"}));
}

TEST(ParseItemList, NoListYieldsEmpty) {
  EXPECT_EQ(parse_item_list(""), Items{});
  EXPECT_EQ(parse_item_list("just a paragraph of prose\nand another line\n"), Items{});
  // A marker with only whitespace after it contributes nothing.
  EXPECT_EQ(parse_item_list("- \n-  \n"), Items{});
}

TEST(ParseItemList, LeadingContinuationWithoutItemIsProse) {
  // Indented text before any item has nothing to attach to.
  EXPECT_EQ(parse_item_list("   floating indented line\n- real item\n"), (Items{"real item"}));
}

TEST(ParseItemList, NumberedMarkerNeedsPunctuation) {
  EXPECT_EQ(parse_item_list("3 little pigs\n"), Items{});  // "3 " is not a marker
  EXPECT_EQ(parse_item_list("3. little pigs\n"), (Items{"little pigs"}));
}

TEST(RenderItemList, Styles) {
  Items items{"alpha", "beta"};
  EXPECT_EQ(render_item_list(items), "- alpha\n- beta\n");
  EXPECT_EQ(render_item_list(items, "* "), "* alpha\n* beta\n");
  EXPECT_EQ(render_item_list(items, "\xE2\x80\xA2 "), "\xE2\x80\xA2 alpha\n\xE2\x80\xA2 beta\n");
  EXPECT_EQ(render_item_list(items, "n."), "1. alpha\n2. beta\n");
  EXPECT_EQ(render_item_list(items, "n)"), "1) alpha\n2) beta\n");
  EXPECT_EQ(render_item_list({}), "");
}

TEST(RenderItemList, RoundTripsThroughParser) {
  Items items{"keep units consistent", "show the final answer on its own line"};
  for (const char* style : {"- ", "* ", "\xE2\x80\xA2 ", "n.", "n)"}) {
    EXPECT_EQ(parse_item_list(render_item_list(items, style)), items) << "style " << style;
  }
}
