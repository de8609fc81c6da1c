#include "geonet/alp.hpp"
#include "support/gen.hpp"

#include <catch_amalgamated.hpp>

using namespace geonet;
using namespace geonet::alp;

TEST_CASE("offset write encodes to the documented bytes", "[alp]") {
  const AlpCommand cmd{{AlpAction::write(kNodeConfigFile, 3, {0xAA})}};
  CHECK(to_hex(encode_command(cmd)) == "04410300000001000000AA");
  CHECK(describe_action(cmd.actions[0]) == "WriteFileData file=0x41 offset=3 len=1 payload=AA");
}

TEST_CASE("decode of spaced hex matches the write example", "[alp]") {
  const auto cmd = decode_command(from_hex("04 41 03000000 01000000 AA"));
  REQUIRE(cmd.actions.size() == 1);
  const auto& a = cmd.actions[0];
  CHECK(a.opcode == Opcode::WriteFileData);
  CHECK(a.file == kNodeConfigFile);
  CHECK(a.offset == 3);
  CHECK(a.length == 1);
  CHECK(a.payload == Bytes{0xAA});
}

TEST_CASE("read and status layouts", "[alp]") {
  CHECK(to_hex(encode_command({{AlpAction::read(kNodeConfigFile, 0, 12)}})) == "0141000000000C000000");
  CHECK(to_hex(encode_command({{AlpAction::status(kSensorDataFile, 0, 0, 0x12)}})) == "7F40000000000000000012");
  CHECK(AlpAction::read(kNodeConfigFile, 0, 12).encoded_size() == kActionHeaderSize);
}

TEST_CASE("decode errors carry the byte offset", "[alp]") {
  SECTION("unknown opcode at offset 0") {
    try {
      decode_command(from_hex("FF41000000000000000000"));
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(e.code() == DecodeErrc::UnknownOpcode);
      CHECK(e.offset() == 0);
    }
  }
  SECTION("truncated second action") {
    const Bytes first = encode_command({{AlpAction::read(kNodeConfigFile, 0, 12)}});
    Bytes input = first;
    input.push_back(0x04);
    input.push_back(0x41);
    try {
      decode_command(input);
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(e.code() == DecodeErrc::TruncatedInput);
      CHECK(e.offset() == first.size());
    }
  }
  SECTION("write payload shorter than its length") {
    CHECK_THROWS_AS(decode_command(from_hex("0441030000000200000000")), DecodeError);
  }
  SECTION("empty input") { CHECK_THROWS_AS(decode_command({}), DecodeError); }
}

TEST_CASE("encode rejects inconsistent actions", "[alp]") {
  AlpAction bad = AlpAction::write(kNodeConfigFile, 0, {1, 2});
  bad.length = 3;
  CHECK_THROWS_AS(encode_command({{bad}}), std::invalid_argument);
}

TEST_CASE("hex helpers", "[alp]") {
  CHECK(from_hex("0a Ff\n01") == Bytes{0x0A, 0xFF, 0x01});
  CHECK(to_hex(Bytes{0x0A, 0xFF}) == "0AFF");
  CHECK_THROWS_AS(from_hex("ABC"), std::invalid_argument);
  CHECK_THROWS_AS(from_hex("ZZ"), std::invalid_argument);
}

TEST_CASE("property: random commands roundtrip bit-exact", "[alp]") {
  testing::Gen g(0xA1B2);
  for (int i = 0; i < 2000; ++i) {
    const AlpCommand cmd = g.command();
    const Bytes bytes = encode_command(cmd);
    const AlpCommand back = decode_command(bytes);
    REQUIRE(back == cmd);
    REQUIRE(encode_command(back) == bytes);
  }
}

TEST_CASE("property: describe and parse are inverse", "[alp]") {
  testing::Gen g(77);
  for (int i = 0; i < 1000; ++i) {
    const AlpAction a = g.action();
    REQUIRE(parse_action(describe_action(a)) == a);
  }
  CHECK_THROWS_AS(parse_action("Frobnicate file=0x41"), std::invalid_argument);
}

TEST_CASE("file store access rules", "[alp]") {
  FileStore fs;
  fs.create({FileId{1}, 4, {true, true}, Storage::Volatile});
  fs.create({FileId{2}, 2, {true, false}, Storage::Persistent});
  CHECK_THROWS_AS(fs.create({FileId{1}, 4}), FileError);
  CHECK_THROWS_AS(fs.create({FileId{3}, 0}), FileError);

  fs.write(FileId{1}, 1, Bytes{9, 8});
  CHECK(fs.read(FileId{1}, 0, 4) == Bytes{0, 9, 8, 0});

  auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const FileError& e) {
      return status_for(e.code());
    }
    return status::kOk;
  };
  CHECK(code_of([&] { fs.write(FileId{1}, 3, Bytes{1, 2}); }) == status::kOutOfBounds);
  CHECK(code_of([&] { fs.read(FileId{1}, 0xFFFFFFFF, 2); }) == status::kOutOfBounds);
  CHECK(code_of([&] { fs.write(FileId{2}, 0, Bytes{1}); }) == status::kPermissionDenied);
  CHECK(code_of([&] { fs.read(FileId{9}, 0, 1); }) == status::kNoSuchFile);

  fs.reset();
  CHECK(fs.read(FileId{1}, 0, 4) == Bytes{0, 0, 0, 0});
}

TEST_CASE("hooks fire after the access in registration order", "[alp]") {
  FileStore fs;
  fs.create({FileId{5}, 8});
  std::vector<std::string> seen;
  fs.register_hook({FileId{5}, Trigger::OnWrite, "first", [&](const FileAccess& a) {
                      seen.push_back("first@" + std::to_string(a.offset));
                      CHECK(fs.content(FileId{5})[a.offset] == 0x77);
                    }});
  fs.register_hook({FileId{5}, Trigger::OnWrite, "second", [&](const FileAccess&) { seen.push_back("second"); }});
  fs.register_hook({FileId{5}, Trigger::OnRead, "read", [&](const FileAccess&) { seen.push_back("read"); }});
  fs.write(FileId{5}, 2, Bytes{0x77});
  fs.read(FileId{5}, 0, 1);
  CHECK(seen == std::vector<std::string>{"first@2", "second", "read"});

  seen.clear();
  CHECK_THROWS(fs.write(FileId{5}, 8, Bytes{1}));
  CHECK(seen.empty());
}
