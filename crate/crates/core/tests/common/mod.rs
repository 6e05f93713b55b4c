//! Shared fixtures for integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use git2::{Oid, Repository, Signature, Time};

pub const FOO_V1: &str = "package demo;

public class Foo {
    private int[] data = new int[4];
    private String name;

    public int bar() {
        return name.length();
    }

    public int get(int i) {
        return data[i];
    }

    public int sum() {
        int s = 0;
        for (int i = 0; i < data.length; i++) {
            s += data[i];
        }
        return s;
    }
}
";

const FOO: &str = "src/main/java/demo/Foo.java";

/// Builds commits with fixed authors and timestamps so ids are reproducible.
pub struct RepoBuilder {
    pub repo: Repository,
    files: BTreeMap<String, String>,
    head: Option<Oid>,
    tick: i64,
}

impl RepoBuilder {
    pub fn init(dir: &Path) -> RepoBuilder {
        RepoBuilder { repo: Repository::init(dir).unwrap(), files: BTreeMap::new(), head: None, tick: 0 }
    }

    fn tree_of(&self, files: &BTreeMap<String, String>) -> Oid {
        let mut index = git2::Index::new().unwrap();
        for (path, content) in files {
            let blob = self.repo.blob(content.as_bytes()).unwrap();
            let entry = git2::IndexEntry {
                ctime: git2::IndexTime::new(0, 0),
                mtime: git2::IndexTime::new(0, 0),
                dev: 0,
                ino: 0,
                mode: 0o100644,
                uid: 0,
                gid: 0,
                file_size: content.len() as u32,
                id: blob,
                flags: 0,
                flags_extended: 0,
                path: path.as_bytes().to_vec(),
            };
            index.add(&entry).unwrap();
        }
        index.write_tree_to(&self.repo).unwrap()
    }

    fn commit_tree(&mut self, files: &BTreeMap<String, String>, message: &str, parents: &[Oid]) -> Oid {
        self.tick += 1;
        let sig = Signature::new("Fixture", "fixture@example.org", &Time::new(1_600_000_000 + self.tick * 60, 0)).unwrap();
        let tree = self.repo.find_tree(self.tree_of(files)).unwrap();
        let parents: Vec<git2::Commit> = parents.iter().map(|p| self.repo.find_commit(*p).unwrap()).collect();
        let refs: Vec<&git2::Commit> = parents.iter().collect();
        self.repo.commit(None, &sig, &sig, message, &tree, &refs).unwrap()
    }

    /// Commits `changes` on top of the main line.
    pub fn commit(&mut self, changes: &[(&str, &str)], message: &str) -> Oid {
        for (p, c) in changes {
            self.files.insert(p.to_string(), c.to_string());
        }
        let files = self.files.clone();
        let parents: Vec<Oid> = self.head.into_iter().collect();
        let id = self.commit_tree(&files, message, &parents);
        self.set_head(id);
        id
    }

    /// Commits `changes` on a side branch off the main line, then merges it.
    pub fn merge_side(&mut self, changes: &[(&str, &str)], side_message: &str) -> Oid {
        let base = self.head.expect("merge needs history");
        for (p, c) in changes {
            self.files.insert(p.to_string(), c.to_string());
        }
        let files = self.files.clone();
        let side = self.commit_tree(&files, side_message, &[base]);
        let merge = self.commit_tree(&files, "Merge branch 'side'", &[base, side]);
        self.set_head(merge);
        merge
    }

    fn set_head(&mut self, id: Oid) {
        self.head = Some(id);
        self.repo.reference("refs/heads/main", id, true, "fixture").unwrap();
        self.repo.set_head("refs/heads/main").unwrap();
    }

    pub fn file(&self, path: &str) -> String {
        self.files[path].clone()
    }
}

/// Ten commits on `main`, two of them merges: one 6-line change, one
/// docs-only change and three small keyword-matching source fixes.
/// Returns the post commits of the three fixes, oldest first.
pub fn build_mining_fixture(dir: &Path) -> (RepoBuilder, Vec<Oid>) {
    let mut b = RepoBuilder::init(dir);
    let mut fixes = Vec::new();
    b.commit(&[(FOO, FOO_V1), ("docs/guide.md", "# Guide\n\nUse Foo.\n"), ("build.gradle", "apply plugin: 'java'\n")], "Initial import");
    let v2 = b.file(FOO).replace("return name.length();", "return name == null ? 0 : name.length();");
    fixes.push(b.commit(&[(FOO, &v2)], "Fix NullPointerException in Foo.bar"));
    let v3 = b.file(FOO).replace(
        "    public int sum() {",
        "    public int max() {\n        int m = 0;\n        for (int d : data) m = Math.max(m, d);\n        return m;\n    }\n\n    public int sum() {",
    );
    b.commit(&[(FOO, &v3)], "fix wrong result in max computation");
    b.merge_side(&[("docs/notes.md", "notes\n")], "Add release notes");
    b.commit(&[("docs/guide.md", "# Guide\n\nUse Foo carefully.\n")], "Fix typo error in docs");
    let v6 = b.file(FOO).replace("return data[i];", "return i < data.length ? data[i] : 0;");
    fixes.push(b.commit(&[(FOO, &v6)], "Fix ArrayIndexOutOfBoundsException in Foo.get"));
    let v7 = b.file(FOO).replace("    private String name;\n", "    private String name;\n    private int size;\n");
    b.commit(&[(FOO, &v7)], "Add feature X");
    b.merge_side(&[("src/main/java/demo/Bar.java", "package demo;\n\npublic class Bar {\n}\n")], "Add Bar");
    let v9 = b.file(FOO).replace("s += data[i];", "s = s + data[i];");
    fixes.push(b.commit(&[(FOO, &v9)], "Fix logic error in Foo.sum"));
    b.commit(&[("build.gradle", "apply plugin: 'java'\nversion = '1.1'\n")], "Update build script");
    (b, fixes)
}
