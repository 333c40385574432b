#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "mtbias/corpus.hpp"
#include "mtbias/text.hpp"

using namespace mtbias;

namespace {
const std::filesystem::path kData = MTBIAS_TEST_DATA;
}

TEST(Words, SplitsOnWhitespaceKeepingPunctuation) {
  EXPECT_EQ(words("La mecánica saluda."),
            (std::vector<std::string>{"La", "mecánica", "saluda."}));
}

TEST(Words, EmptyInput) { EXPECT_TRUE(words("").empty()); }

TEST(Words, CollapsesRuns) {
  EXPECT_EQ(words("a  b"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(words("  a\t\nb  "), (std::vector<std::string>{"a", "b"}));
}

TEST(Words, UnicodeWhitespace) {
  // NO-BREAK SPACE and IDEOGRAPHIC SPACE separate words too.
  EXPECT_EQ(words("a b　c"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(NormalizeWord, LowercasesAndStripsEdgePunctuation) {
  EXPECT_EQ(normalize_word("She,"), "she");
  EXPECT_EQ(normalize_word("¿Quién?"), "quién");
  EXPECT_EQ(normalize_word("MECÁNICA."), "mecánica");
  EXPECT_EQ(normalize_word("\"their\""), "their");
  EXPECT_EQ(normalize_word("..."), "");
  EXPECT_EQ(normalize_word("e-mail"), "e-mail");
}

TEST(ParseCorpus, AntiStereotypicalFemale) {
  const auto c = parse_corpus_text(
      "female\t7\tThe mechanic greets with the receptionist because she was in a good mood.\tmechanic\tanti\n");
  ASSERT_EQ(c.size(), 1u);
  const auto& inst = c.instances()[0];
  EXPECT_EQ(inst.id, "line:1");
  EXPECT_EQ(inst.gold_gender, Gender::Female);
  EXPECT_EQ(inst.pronoun_index, 7u);
  EXPECT_EQ(inst.stereotype, Stereotype::Anti);
}

TEST(ParseCorpus, NeutralWithoutTag) {
  const auto c = parse_corpus_text(
      "neutral\t6\tThe technician told the customer that they could pay with cash.\ttechnician\n");
  EXPECT_EQ(c.instances()[0].gold_gender, Gender::Neutral);
  EXPECT_EQ(c.instances()[0].stereotype, Stereotype::None);
}

// Indices that land on a non-pronoun word ("a", "pay") are rejected.
TEST(ParseCorpus, IndexMustPointAtThePronoun) {
  EXPECT_THROW(parse_corpus_text("female\t9\tThe mechanic greets with the receptionist because she "
                                 "was in a good mood.\tmechanic\tanti\n"),
               ValidationError);
  EXPECT_THROW(parse_corpus_text("neutral\t8\tThe technician told the customer that they could pay "
                                 "with cash.\ttechnician\n"),
               ValidationError);
}

TEST(ParseCorpus, PronounIndexOutOfBounds) {
  EXPECT_THROW(parse_corpus_text("male\t99\tThe developer argued.\tdeveloper\tpro\n"), ValidationError);
}

TEST(ParseCorpus, MalformedLinesNameTheLine) {
  try {
    parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\tpro\nmale\t1\tonly three\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_corpus_text("boy\t3\tThe developer said he left.\tdeveloper\tpro\n"), ParseError);
  EXPECT_THROW(parse_corpus_text("male\tx\tThe developer said he left.\tdeveloper\tpro\n"), ParseError);
  EXPECT_THROW(parse_corpus_text("male\t-1\tThe developer said he left.\tdeveloper\tpro\n"), ParseError);
  EXPECT_THROW(parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\tmaybe\n"), ParseError);
}

TEST(ParseCorpus, InvariantViolations) {
  // Word at the index is not a pronoun.
  EXPECT_THROW(parse_corpus_text("male\t0\tThe developer said he left.\tdeveloper\tpro\n"), ValidationError);
  // Neutral pronoun with a gendered label.
  EXPECT_THROW(parse_corpus_text("male\t3\tThe developer said they left.\tdeveloper\tpro\n"), ValidationError);
  // Profession absent.
  EXPECT_THROW(parse_corpus_text("male\t3\tThe developer said he left.\tnurse\tpro\n"), ValidationError);
  // Gendered instance tagged none.
  EXPECT_THROW(parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\tnone\n"), ValidationError);
  // Gendered instance without any tag.
  EXPECT_THROW(parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\n"), ValidationError);
}

TEST(ParseCorpus, SubsetTagAndUntaggedMode) {
  ParseOptions pro;
  pro.stereotype_tag = Stereotype::Pro;
  const auto c = parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\n", pro);
  EXPECT_EQ(c.instances()[0].stereotype, Stereotype::Pro);

  ParseOptions loose;
  loose.require_stereotype = false;
  const auto d = parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\n", loose);
  EXPECT_EQ(d.instances()[0].stereotype, Stereotype::None);

  // A fifth column contradicting the subset tag is rejected.
  EXPECT_THROW(parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\tanti\n", pro),
               ValidationError);
}

TEST(ParseCorpus, MultiwordProfessionAndPunctuation) {
  const auto c = parse_corpus_text(
      "female\t4\tThe construction worker thanked her, the nurse.\tconstruction worker\tanti\n");
  const auto span = find_word_span(c.instances()[0].source_text, "construction worker");
  ASSERT_TRUE(span);
  EXPECT_EQ(span->first, 1u);
  EXPECT_EQ(span->second, 2u);
}

TEST(Corpus, DuplicateIdsOnMerge) {
  const auto a = parse_corpus_text("male\t3\tThe developer said he left.\tdeveloper\tpro\n");
  EXPECT_THROW(merge_corpora({a, a}), ValidationError);
  ParseOptions other;
  other.id_prefix = "anti/";
  const auto b = parse_corpus_text("female\t3\tThe developer said she left.\tdeveloper\tanti\n", other);
  const auto merged = merge_corpora({a, b});
  EXPECT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged.at("anti/line:1").gold_gender, Gender::Female);
}

TEST(Corpus, FixtureCountsAndRoundTrip) {
  const auto bytes = read_file(kData / "fixture_corpus.tsv");
  const auto c = parse_corpus_text(bytes);
  EXPECT_EQ(c.size(), 64u);
  for (auto g : {Gender::Male, Gender::Female}) {
    for (auto s : {Stereotype::Pro, Stereotype::Anti}) EXPECT_EQ(c.count(g, s), 16u);
  }
  EXPECT_EQ(serialize_corpus(c), bytes);

  const auto gnt_bytes = read_file(kData / "gnt_corpus.tsv");
  EXPECT_EQ(serialize_corpus(parse_corpus_text(gnt_bytes)), gnt_bytes);
}

// Every parsed instance's pronoun slot normalizes to an inventory pronoun, and
// serialization round-trips, over randomly assembled sentences.
TEST(Corpus, PropertyRandomSentences) {
  std::mt19937_64 gen(7);
  const std::vector<std::string> filler = {"the", "Nurse", "asked", "a", "question", "about", "work,", "today."};
  const std::vector<std::pair<std::string, std::string>> prons = {
      {"he", "male"}, {"She", "female"}, {"him,", "male"}, {"her.", "female"}, {"their", "neutral"}};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> ws = {"The", "pilot"};
    const auto extra = gen() % 6;
    for (std::size_t i = 0; i < extra; ++i) ws.push_back(filler[gen() % filler.size()]);
    const auto& [pron, gender] = prons[gen() % prons.size()];
    const std::size_t idx = 2 + gen() % (ws.size() - 1);
    ws.insert(ws.begin() + static_cast<std::ptrdiff_t>(idx), pron);
    std::string sentence;
    for (const auto& w : ws) sentence += (sentence.empty() ? "" : " ") + w;
    std::string line = gender + "\t" + std::to_string(idx) + "\t" + sentence + "\tpilot";
    if (gender != "neutral") line += trial % 2 ? "\tpro" : "\tanti";
    line += "\n";
    const auto c = parse_corpus_text(line);
    const auto& inst = c.instances()[0];
    EXPECT_TRUE(is_pronoun(normalize_word(words(inst.source_text)[inst.pronoun_index])));
    EXPECT_EQ(serialize_corpus(c), line);
  }
}
