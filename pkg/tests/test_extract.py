"""Build-file, manifest, layout, lexer, and mention extraction tests."""

from bugnav import extract
from bugnav.corpus.models import IssueDocument, IssueRef, RepoSnapshot


POM = """\
<project>
  <modelVersion>4.0.0</modelVersion>
  <dependencies>
    <dependency>
      <groupId>org.annolab.tt4j</groupId>
      <artifactId>org.annolab.tt4j</artifactId>
      <version>1.2.1</version>
    </dependency>
    <dependency>
      <groupId>junit</groupId>
      <artifactId>junit</artifactId>
      <version>4.12</version>
      <scope>test</scope>
    </dependency>
  </dependencies>
</project>
"""

POM_NAMESPACED = """\
<project xmlns="http://maven.apache.org/POM/4.0.0">
  <dependencies>
    <dependency>
      <groupId>org.apache.opennlp</groupId>
      <artifactId>opennlp-tools</artifactId>
      <version>1.9.0</version>
    </dependency>
  </dependencies>
</project>
"""

GRADLE = """\
apply plugin: 'com.android.application'

dependencies {
    implementation 'com.google.android.material:material:1.1.0'
    implementation "androidx.appcompat:appcompat:1.2.0"
    implementation group: 'org.nd4j', name: 'nd4j-native', version: '1.0.0-beta7'
    testImplementation 'junit:junit:4.12'
}
"""

MANIFEST = """\
<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android"
    package="com.example.app">
    <uses-permission android:name="android.permission.CAMERA" />
    <uses-permission android:name="android.permission.WRITE_EXTERNAL_STORAGE" />
    <uses-permission android:name="com.example.app.CUSTOM" />
    <application android:label="demo" />
</manifest>
"""

LAYOUT = """\
<?xml version="1.0" encoding="utf-8"?>
<LinearLayout xmlns:android="http://schemas.android.com/apk/res/android"
    android:id="@+id/root_panel"
    android:orientation="vertical">
    <TextView android:id="@+id/status_text" />
    <com.google.android.material.button.MaterialButton android:id="@+id/save_btn" />
</LinearLayout>
"""


def _snapshot(files, owner="octo", repo="demo"):
    return RepoSnapshot(owner=owner, repo=repo, head="f" * 40, files=files)


class TestDependencies:
    def test_pom(self):
        deps = extract.extract_dependencies(_snapshot({"pom.xml": POM}))
        canon = {d.canonical for d in deps}
        assert canon == {"org.annolab.tt4j:org.annolab.tt4j", "junit:junit"}

    def test_pom_with_namespace(self):
        deps = extract.extract_dependencies(_snapshot({"pom.xml": POM_NAMESPACED}))
        assert {d.canonical for d in deps} == {"org.apache.opennlp:opennlp-tools"}

    def test_gradle_both_styles(self):
        deps = extract.extract_dependencies(_snapshot({"app/build.gradle": GRADLE}))
        canon = {d.canonical for d in deps}
        assert "com.google.android.material:material" in canon
        assert "androidx.appcompat:appcompat" in canon
        assert "org.nd4j:nd4j-native" in canon
        assert "junit:junit" in canon

    def test_malformed_pom_degrades_to_empty(self):
        deps = extract.extract_dependencies(_snapshot({"pom.xml": "<project><depend"}))
        assert deps == set()

    def test_no_build_files(self):
        assert extract.extract_dependencies(_snapshot({"src/A.java": "class A {}"})) == set()

    def test_canonical_is_lowercase(self):
        pom = POM.replace("junit", "JUnit")
        deps = extract.extract_dependencies(_snapshot({"pom.xml": pom}))
        assert "junit:junit" in {d.canonical for d in deps}


class TestPermissions:
    def test_manifest_permissions(self):
        perms = extract.extract_permissions(_snapshot({"app/src/main/AndroidManifest.xml": MANIFEST}))
        assert perms == {"camera", "write_external_storage", "com.example.app.custom"}

    def test_malformed_manifest(self):
        perms = extract.extract_permissions(_snapshot({"AndroidManifest.xml": "<manifest"}))
        assert perms == set()

    def test_not_android(self):
        assert extract.extract_permissions(_snapshot({"pom.xml": POM})) == set()


class TestUiElements:
    def test_widgets_and_ids(self):
        ui = extract.extract_ui_elements(
            _snapshot({"app/src/main/res/layout/activity_main.xml": LAYOUT})
        )
        assert "linearlayout" in ui
        assert "textview" in ui
        assert "materialbutton" in ui  # dotted widget keeps its leaf name
        assert {"root_panel", "status_text", "save_btn"} <= ui

    def test_layout_variants_counted(self):
        ui = extract.extract_ui_elements(_snapshot({"res/layout-land/main.xml": LAYOUT}))
        assert "save_btn" in ui

    def test_non_layout_xml_ignored(self):
        ui = extract.extract_ui_elements(_snapshot({"res/values/strings.xml": "<resources/>"}))
        assert ui == set()


class TestCodeLexer:
    def test_spec_example(self):
        stream = extract.tokenize_code("int x = 0; // hi")
        assert stream.kinds() == ("kw_int", "ident", "eq", "num", "semi")

    def test_string_contents_dropped(self):
        stream = extract.tokenize_code('String s = "hello world";')
        assert stream.kinds() == ("ident", "ident", "eq", "str", "semi")

    def test_block_comments_dropped(self):
        a = extract.tokenize_code("int a = 1; /* a long\n comment */ int b = 2;")
        b = extract.tokenize_code("int a = 1; int b = 2;")
        assert a.kinds() == b.kinds()

    def test_identifier_abstraction(self):
        a = extract.tokenize_code("int total = count + 1;")
        b = extract.tokenize_code("int sum = items + 1;")
        assert a.kinds() == b.kinds()
        assert a.texts() != b.texts()

    def test_multichar_operators(self):
        stream = extract.tokenize_code("if (a >= b && c != d) { a >>= 2; }")
        kinds = stream.kinds()
        assert "ge" in kinds and "and_and" in kinds and "ne" in kinds

    def test_empty_source(self):
        assert extract.tokenize_code("").kinds() == ()


class TestMentions:
    def _issue(self, body, comments=()):
        return IssueDocument(
            ref=IssueRef("octo", "demo", 1),
            title="a title",
            body=body,
            comments=list(comments),
        )

    def test_camel_case_matches_hyphenated_artifact(self):
        issue = self._issue("The SnowballStemmer blows up on Swedish input")
        vocab = {"org.tartarus:snowball-stemmer": "snowball-stemmer"}
        assert extract.extract_mentions(issue, vocab) == {"org.tartarus:snowball-stemmer"}

    def test_single_word(self):
        issue = self._issue("camera permission denied on resume")
        vocab = {"camera": "camera", "internet": "internet"}
        assert extract.extract_mentions(issue, vocab) == {"camera"}

    def test_multiword_needs_contiguous_tokens(self):
        vocab = {"save_btn": "save_btn"}
        hit = self._issue("the save btn disappears")
        miss = self._issue("press the save button now")
        assert extract.extract_mentions(hit, vocab) == {"save_btn"}
        assert extract.extract_mentions(miss, vocab) == set()

    def test_stemming_bridges_inflection(self):
        # "stemmers" in text, "stemmer" in the artifact name
        issue = self._issue("both stemmers crash under load")
        vocab = {"x:stemmer": "stemmer"}
        assert extract.extract_mentions(issue, vocab) == {"x:stemmer"}

    def test_comments_are_searched(self):
        issue = self._issue("body says nothing", comments=["try the camera fix"])
        assert extract.extract_mentions(issue, {"camera": "camera"}) == {"camera"}


class TestRepoContext:
    def test_android_context(self):
        snap = _snapshot(
            {
                "app/build.gradle": GRADLE,
                "app/src/main/AndroidManifest.xml": MANIFEST,
                "app/src/main/res/layout/activity_main.xml": LAYOUT,
                "app/src/main/java/com/example/app/Main.java": "class Main { int x = 0; }",
            }
        )
        ctx = extract.build_repo_context(snap)
        assert ctx.is_android
        assert "camera" in ctx.permissions
        assert "save_btn" in ctx.ui_elements
        assert "com.google.android.material:material" in {d.canonical for d in ctx.dependencies}
        assert list(ctx.code_files) == ["app/src/main/java/com/example/app/Main.java"]

    def test_plain_java_context(self):
        snap = _snapshot({"pom.xml": POM, "src/A.java": "class A {}"})
        ctx = extract.build_repo_context(snap)
        assert not ctx.is_android
        assert ctx.permissions == set()
        assert ctx.ui_elements == set()
        assert len(ctx.dependencies) == 2
