//! Drives the `fixrank` binary through mine, review, train, rank, eval and sample.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use git2::{Repository, Signature, Time};

const FOO: &str = "class Foo {
    String name;
    int[] data = new int[4];

    int bar() {
        return name.length();
    }

    int get(int i) {
        return data[i];
    }

    int sum() {
        int s = 0;
        for (int i = 0; i < data.length; i++) {
            s += data[i];
        }
        return s;
    }
}
";

fn commit(repo: &Repository, tick: i64, content: &str, message: &str) {
    fs::write(repo.workdir().unwrap().join("Foo.java"), content).unwrap();
    let mut index = repo.index().unwrap();
    index.add_path(Path::new("Foo.java")).unwrap();
    index.write().unwrap();
    let tree = repo.find_tree(index.write_tree().unwrap()).unwrap();
    let sig = Signature::new("Dev", "dev@example.org", &Time::new(1_700_000_000 + tick * 60, 0)).unwrap();
    let parent = repo.head().ok().map(|h| h.peel_to_commit().unwrap());
    let parents: Vec<&git2::Commit> = parent.iter().collect();
    repo.commit(Some("HEAD"), &sig, &sig, message, &tree, &parents).unwrap();
}

fn build_repo(dir: &Path) {
    let repo = Repository::init(dir).unwrap();
    commit(&repo, 0, FOO, "Initial import");
    let v1 = FOO.replace("return name.length();", "if (name == null) return 0;\n        return name.length();");
    commit(&repo, 1, &v1, "Fix NullPointerException in bar");
    let v2 = v1.replace("return data[i];", "return i < data.length ? data[i] : 0;");
    commit(&repo, 2, &v2, "Fix ArrayIndexOutOfBoundsException in get");
    let v3 = v2.replace("i < data.length; i++", "i <= data.length - 1; i++");
    commit(&repo, 3, &v3, "Fix logic error in sum loop");
}

fn fixrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixrank")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fixrank(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_candidates(dir: &Path) -> String {
    fs::create_dir_all(dir.join("patches")).unwrap();
    fs::write(dir.join("Foo.java"), FOO).unwrap();
    fs::write(
        dir.join("patches/guard.diff"),
        "--- a/Foo.java\n+++ b/Foo.java\n@@ -5,3 +5,4 @@\n     int bar() {\n+        if (name == null) return 0;\n         return name.length();\n     }\n",
    )
    .unwrap();
    fs::write(
        dir.join("patches/plus.diff"),
        "--- a/Foo.java\n+++ b/Foo.java\n@@ -6,1 +6,1 @@\n-        return name.length();\n+        return name.length() + 1;\n",
    )
    .unwrap();
    let manifest = dir.join("bug.manifest");
    fs::write(
        &manifest,
        "bug: Demo-1\ntool: ToolA\nplus\t1\tpatches/plus.diff\tFoo.java\tplausible_incorrect\nguard\t2\tpatches/guard.diff\tFoo.java\tcorrect\n",
    )
    .unwrap();
    manifest.to_str().unwrap().to_string()
}

#[test]
fn full_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = tmp.path().join("demo");
    build_repo(&repo);
    let corpus = tmp.path().join("corpus");
    let (repo_s, corpus_s) = (repo.to_str().unwrap(), corpus.to_str().unwrap());

    let mined = ok(&["mine", "--corpus", corpus_s, "--repo", repo_s]);
    assert_eq!(mined.lines().nth(1).unwrap(), "demo\t3\t0\t3");

    let queue = tmp.path().join("queue.txt");
    let q = queue.to_str().unwrap();
    assert!(ok(&["review", "export", "--corpus", corpus_s, "--out", q]).starts_with("exported 3 "));
    // Accept everything except the array fix, which gets one accept only.
    let text = fs::read_to_string(&queue).unwrap();
    let mut filled = String::new();
    let mut block = 0;
    for line in text.lines() {
        if line.starts_with("id: ") {
            block += 1;
        }
        let verdict = if block == 2 && line == "verdict[reviewer-2]:" { "" } else { " accept" };
        if line.starts_with("verdict[") && line.ends_with(':') {
            filled.push_str(&format!("{line}{verdict}\n"));
        } else {
            filled.push_str(&format!("{line}\n"));
        }
    }
    fs::write(&queue, filled).unwrap();
    assert_eq!(ok(&["review", "import", "--corpus", corpus_s, "--file", q]).trim(), "accepted 2\trejected 0\tpending 1");

    let model = tmp.path().join("model.txt");
    let m = model.to_str().unwrap();
    let trained = ok(&["train", "--corpus", corpus_s, "--model", m]);
    let total: usize = trained.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 2);

    let manifest = write_candidates(&tmp.path().join("bug"));
    let ranked = ok(&["rank", "--model", m, "--manifest", &manifest]);
    let rows: Vec<Vec<&str>> = ranked.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][1], rows[1][1]), ("1", "2"));
    assert!(rows.iter().all(|r| r[0] == "Demo-1"));
    assert_eq!(ranked, ok(&["rank", "--model", m, "--manifest", &manifest]));
    let exact = ok(&["rank", "--model", m, "--manifest", &manifest, "--exact"]);
    let order = |s: &str| s.lines().map(|l| l.split('\t').nth(2).unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(order(&ranked), order(&exact));

    let scatter = tmp.path().join("scatter.tsv");
    let eval = ok(&["eval", "--model", m, "--manifest", &manifest, "--min-patches", "1", "--top-k", "1,2", "--scatter", scatter.to_str().unwrap()]);
    assert!(eval.contains("k\tN\tB\tO\tP\ttotal"));
    assert_eq!(fs::read_to_string(&scatter).unwrap().lines().count(), 2);

    let sweep = ok(&["sample", "--corpus", corpus_s, "--manifest", &manifest, "--no-review", "--fraction", "1.0", "--seed", "1,2"]);
    let row: Vec<&str> = sweep.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!((row[0], row[2], row[4]), ("100%", "1", "1.00"), "a full sample changes nothing");
}

#[test]
fn errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_candidates(tmp.path());
    let missing = tmp.path().join("missing.model");
    let out = fixrank(&["rank", "--model", missing.to_str().unwrap(), "--manifest", &manifest]);
    assert_eq!(out.status.code(), Some(3));

    let empty = tmp.path().join("empty-corpus");
    let model = tmp.path().join("m.txt");
    let out = fixrank(&["train", "--corpus", empty.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(9));

    let out = fixrank(&["mine", "--corpus", empty.to_str().unwrap(), "--repo", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));

    let out = fixrank(&["rank", "--manifest", &manifest]);
    assert_eq!(out.status.code(), Some(2), "usage errors come from the argument parser");
}
