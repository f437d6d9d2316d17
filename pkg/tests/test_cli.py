import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from snowsum import cascade as casc
from snowsum import domain, features, linsvm
from snowsum.cli import main
from snowsum.domain import EventClass, GroundTruthEvent
from tests import synth


def write_store_file(path, X, codes, tag="synth"):
    records = [(i, int(codes[i]), X[i]) for i in range(len(codes))]
    store = features.build_store(X.shape[1], tag, records)
    path.write_bytes(features.write_store(store))
    return path


def pose_store(tmp_path, name="pose.store", n_per_class=8, dim=8, seed=0):
    X, y = synth.gaussian_classes(codes=(0, 1, 2, 3, 4), n_per_class=n_per_class,
                                  dim=dim, seed=seed)
    return write_store_file(tmp_path / name, X, y)


def presence_store(tmp_path, name="presence.store", n_per_class=8, dim=8, seed=0):
    X, y = synth.gaussian_classes(codes=(0, 1, 2, 3, 4, 5), n_per_class=n_per_class,
                                  dim=dim, seed=seed)
    return write_store_file(tmp_path / name, X, y)


def save_png(path, value, size=(16, 16)):
    arr = np.full(size + (3,), value, dtype=np.uint8)
    Image.fromarray(arr).save(path)


class TestUsage:
    def test_no_arguments(self, capsys):
        assert main([]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_missing_required_flag(self, capsys):
        assert main(["train", "--task", "pose"]) == 1


class TestValidateManifest:
    def test_balanced_report(self, tmp_path, capsys):
        records = tuple(
            domain.ManifestRecord(f"r{code}_{i}", f"img/{code}/{i}.png", code)
            for code in range(6) for i in range(3)
        )
        manifest = domain.DatasetManifest("TINY", 1, records)
        path = tmp_path / "m.txt"
        path.write_bytes(domain.serialize_manifest(manifest))

        assert main(["validate-manifest", "--manifest", str(path)]) == 0
        out = capsys.readouterr().out
        assert "SNOWMANIFEST 1 name=TINY records=18" in out
        assert "class 0 count=3" in out
        assert "class 5 count=3" in out

    def test_bad_manifest_exits_2(self, tmp_path, capsys):
        path = tmp_path / "m.txt"
        path.write_text("BOGUS 1 x\n")
        assert main(["validate-manifest", "--manifest", str(path)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["validate-manifest", "--manifest", str(tmp_path / "nope")]) == 2


class TestExtract:
    def test_directory_mode(self, tmp_path, capsys):
        img_dir = tmp_path / "imgs"
        img_dir.mkdir()
        for name, value in [("a.png", 0), ("b.png", 128), ("c.png", 255)]:
            save_png(img_dir / name, value)
        out = tmp_path / "out.store"

        assert main(["extract", "--images", str(img_dir), "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "images=3 extracted=3 skipped=0" in text

        store = features.read_store(out.read_bytes())
        assert len(store) == 3
        assert store.dim == features.BASELINE_DIM
        assert store.source_tag == features.BASELINE_TAG
        assert store.class_codes.tolist() == [0, 0, 0]
        assert store.ids.tolist() == [0, 1, 2]
        # sorted order: a=black, b=mid gray, c=white; grid cells are mean luma/255
        assert store.vectors[0, 0] == 0.0
        assert store.vectors[1, 0] == pytest.approx(128 / 255)
        assert store.vectors[2, 0] == 1.0

    def test_manifest_mode_with_skip(self, tmp_path, capsys):
        img_dir = tmp_path / "imgs"
        img_dir.mkdir()
        save_png(img_dir / "one.png", 10)
        save_png(img_dir / "two.png", 20)
        (img_dir / "broken.png").write_text("not an image")
        records = (
            domain.ManifestRecord("one", "imgs/one.png", 3),
            domain.ManifestRecord("missing", "imgs/gone.png", 1),
            domain.ManifestRecord("broken", "imgs/broken.png", 2),
            domain.ManifestRecord("two", "imgs/two.png", 5),
        )
        manifest_path = tmp_path / "m.txt"
        manifest_path.write_bytes(
            domain.serialize_manifest(domain.DatasetManifest("TINY", 1, records)))
        out = tmp_path / "out.store"

        assert main(["extract", "--manifest", str(manifest_path),
                     "--root", str(tmp_path), "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "images=4 extracted=2 skipped=2" in text
        assert "skipped missing:" in text
        assert "skipped broken:" in text

        store = features.read_store(out.read_bytes())
        assert store.class_codes.tolist() == [3, 5]

    def test_not_a_directory(self, tmp_path, capsys):
        assert main(["extract", "--images", str(tmp_path / "nope"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_empty_directory(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["extract", "--images", str(empty),
                     "--out", str(tmp_path / "o")]) == 2
        assert "no files" in capsys.readouterr().err

    def test_no_readable_images(self, tmp_path, capsys):
        img_dir = tmp_path / "imgs"
        img_dir.mkdir()
        (img_dir / "junk.png").write_text("garbage")
        assert main(["extract", "--images", str(img_dir),
                     "--out", str(tmp_path / "o")]) == 2
        assert "no readable images" in capsys.readouterr().err


class TestTrain:
    def test_pose_happy_path(self, tmp_path, capsys):
        store = pose_store(tmp_path)
        out = tmp_path / "pose.model"
        code = main(["train", "--store", str(store), "--task", "pose",
                     "--out", str(out), "--seed", "3"])
        assert code == 0
        text = capsys.readouterr().out
        assert "SNOWTRAIN 1 task=pose seed=3" in text
        for klass in range(5):
            assert f"class {klass} epochs=" in text
        assert "converged=1" in text and "converged=0" not in text

        model = linsvm.load_model(out.read_bytes())
        assert list(model.classes) == [0, 1, 2, 3, 4]

    def test_presence_happy_path(self, tmp_path, capsys):
        store = presence_store(tmp_path)
        out = tmp_path / "presence.model"
        assert main(["train", "--store", str(store), "--task", "presence",
                     "--out", str(out)]) == 0
        model = linsvm.load_model(out.read_bytes())
        assert list(model.classes) == [1, 5]

    def test_presence_without_non_umpire(self, tmp_path, capsys):
        store = pose_store(tmp_path)
        code = main(["train", "--store", str(store), "--task", "presence",
                     "--out", str(tmp_path / "m")])
        assert code == 2
        assert "missing non-umpire class" in capsys.readouterr().err

    def test_pose_with_missing_class(self, tmp_path, capsys):
        X, y = synth.gaussian_classes(codes=(0, 1, 2, 4), n_per_class=6, dim=6, seed=1)
        store = write_store_file(tmp_path / "gap.store", X, y)
        code = main(["train", "--store", str(store), "--task", "pose",
                     "--out", str(tmp_path / "m")])
        assert code == 2
        assert "missing classes: Out" in capsys.readouterr().err

    def test_non_convergence_exits_3_after_writing(self, tmp_path, capsys):
        store = pose_store(tmp_path)
        out = tmp_path / "rough.model"
        code = main(["train", "--store", str(store), "--task", "pose",
                     "--out", str(out), "--max-epochs", "1", "--tol", "1e-12"])
        assert code == 3
        captured = capsys.readouterr()
        assert "converged=0" in captured.out
        assert "error:" in captured.err
        assert out.exists()


class TestBundle:
    def train_models(self, tmp_path):
        p_store = presence_store(tmp_path)
        q_store = pose_store(tmp_path)
        s1, s2 = tmp_path / "s1.model", tmp_path / "s2.model"
        assert main(["train", "--store", str(p_store), "--task", "presence",
                     "--out", str(s1)]) == 0
        assert main(["train", "--store", str(q_store), "--task", "pose",
                     "--out", str(s2)]) == 0
        return s1, s2

    def test_happy_path(self, tmp_path, capsys):
        s1, s2 = self.train_models(tmp_path)
        out = tmp_path / "c.cascade"
        assert main(["bundle", "--stage1", str(s1), "--stage2", str(s2),
                     "--tag", "synth", "--out", str(out)]) == 0
        assert "SNOWBUNDLE 1 tag=synth dim=8" in capsys.readouterr().out
        bundle = casc.load_cascade(out.read_bytes())
        assert bundle.source_tag == "synth"

    def test_pose_model_as_stage1_rejected(self, tmp_path, capsys):
        _, s2 = self.train_models(tmp_path)
        code = main(["bundle", "--stage1", str(s2), "--stage2", str(s2),
                     "--tag", "synth", "--out", str(tmp_path / "c")])
        assert code == 2
        assert "exactly 2 classes" in capsys.readouterr().err


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Cascade file plus a planted frame store with its ground truth."""
    tmp = tmp_path_factory.mktemp("pipeline")
    bundle = synth.make_cascade(dim=8, n_per_class=12, seed=0, tag="synth")
    cascade_path = tmp / "c.cascade"
    cascade_path.write_bytes(casc.save_cascade(bundle))

    plan = [("event", EventClass.OUT), ("noaction",), ("event", EventClass.SIX)]
    X, truth = synth.planted_stream(plan, window_frames=50, dim=8, seed=0)
    store_path = write_store_file(tmp / "frames.store", X, np.zeros(len(X), dtype=int))
    truth_path = tmp / "truth.txt"
    truth_path.write_bytes(domain.serialize_truth_file(truth))
    return cascade_path, store_path, truth_path


class TestSummarize:
    def test_end_to_end(self, pipeline, tmp_path, capsys):
        cascade_path, store_path, _ = pipeline
        out = tmp_path / "summary.txt"
        code = main(["summarize", "--cascade", str(cascade_path),
                     "--store", str(store_path), "--window", "50",
                     "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "frames=150 window=50" in text
        assert "segments=2" in text
        assert "written " + str(out) in text

        from snowsum.summarizer import parse_summary
        doc = parse_summary(out.read_text())
        spans = [(e.segment.start_frame, e.segment.end_frame, e.segment.event)
                 for e in doc.entries]
        assert spans == [(0, 49, EventClass.OUT), (100, 149, EventClass.SIX)]

        cuts = (tmp_path / "summary.txt.cuts").read_text().splitlines()
        assert cuts[0].endswith("Out") and cuts[1].endswith("Six")

    def test_explicit_cutlist_path(self, pipeline, tmp_path, capsys):
        cascade_path, store_path, _ = pipeline
        out, cuts = tmp_path / "s.txt", tmp_path / "cl.txt"
        assert main(["summarize", "--cascade", str(cascade_path),
                     "--store", str(store_path), "--window", "50",
                     "--out", str(out), "--cutlist", str(cuts)]) == 0
        assert cuts.exists()

    def test_tag_mismatch(self, pipeline, tmp_path, capsys):
        cascade_path, _, _ = pipeline
        X = np.zeros((4, 8), dtype=np.float32)
        other = write_store_file(tmp_path / "other.store", X,
                                 np.zeros(4, dtype=int), tag="elsewhere")
        code = main(["summarize", "--cascade", str(cascade_path),
                     "--store", str(other), "--out", str(tmp_path / "s")])
        assert code == 2
        assert "feature source mismatch" in capsys.readouterr().err

    def test_dim_mismatch(self, pipeline, tmp_path, capsys):
        cascade_path, _, _ = pipeline
        X = np.zeros((4, 5), dtype=np.float32)
        other = write_store_file(tmp_path / "narrow.store", X, np.zeros(4, dtype=int))
        code = main(["summarize", "--cascade", str(cascade_path),
                     "--store", str(other), "--out", str(tmp_path / "s")])
        assert code == 2
        assert "dim mismatch" in capsys.readouterr().err

    def test_non_contiguous_ids(self, pipeline, tmp_path, capsys):
        cascade_path, _, _ = pipeline
        X = np.zeros((3, 8), dtype=np.float32)
        records = [(i * 2, 0, X[i]) for i in range(3)]
        store = features.build_store(8, "synth", records)
        path = tmp_path / "gappy.store"
        path.write_bytes(features.write_store(store))
        code = main(["summarize", "--cascade", str(cascade_path),
                     "--store", str(path), "--out", str(tmp_path / "s")])
        assert code == 2
        assert "contiguous from 0" in capsys.readouterr().err


class TestMetrics:
    def test_perfect_summary(self, pipeline, tmp_path, capsys):
        cascade_path, store_path, truth_path = pipeline
        summary = tmp_path / "summary.txt"
        assert main(["summarize", "--cascade", str(cascade_path),
                     "--store", str(store_path), "--window", "50",
                     "--out", str(summary)]) == 0
        capsys.readouterr()

        assert main(["metrics", "--summary", str(summary),
                     "--truth", str(truth_path)]) == 0
        out = capsys.readouterr().out
        assert "tp=2 fp=0 fn=0" in out
        assert "tpr=1.0000" in out
        assert "ppv=1.0000" in out

    def test_out_file(self, pipeline, tmp_path, capsys):
        cascade_path, store_path, truth_path = pipeline
        summary = tmp_path / "summary.txt"
        main(["summarize", "--cascade", str(cascade_path), "--store", str(store_path),
              "--window", "50", "--out", str(summary)])
        capsys.readouterr()
        report = tmp_path / "report.txt"
        assert main(["metrics", "--summary", str(summary),
                     "--truth", str(truth_path), "--out", str(report)]) == 0
        assert "tpr=1.0000" in report.read_text()
        assert f"written {report}" in capsys.readouterr().out

    def test_undefined_metric_exits_2(self, tmp_path, capsys):
        summary = tmp_path / "empty.txt"
        summary.write_text("SNOWSUM 1 fps=25 window=250\n")
        truth = tmp_path / "truth.txt"
        truth.write_bytes(domain.serialize_truth_file(
            [GroundTruthEvent(0, 10, EventClass.SIX)]))
        assert main(["metrics", "--summary", str(summary),
                     "--truth", str(truth)]) == 2
        assert "undefined" in capsys.readouterr().err


class TestEvaluate:
    def test_kfold_to_stdout(self, tmp_path, capsys):
        store = pose_store(tmp_path)
        code = main(["evaluate", "--store", str(store), "--task", "pose",
                     "--mode", "kfold", "--k", "4", "--seed", "5"])
        assert code == 0
        out = capsys.readouterr().out
        assert "SNOWEVAL 1 mode=kfold task=pose seed=5" in out
        assert "folds=4" in out
        assert all(f"fold {i} size=10 accuracy=" in out for i in range(4))
        assert "mean_accuracy=1.0000" in out

    def test_jackknife(self, tmp_path, capsys):
        X, y = synth.gaussian_classes(codes=(1, 5), n_per_class=4, dim=6, seed=2)
        store = write_store_file(tmp_path / "tiny.store", X, y)
        code = main(["evaluate", "--store", str(store), "--task", "presence",
                     "--mode", "jackknife"])
        assert code == 0
        out = capsys.readouterr().out
        assert "n=8" in out
        assert "accuracy=1.0000" in out

    def test_holdout_with_out_file(self, tmp_path, capsys):
        store = presence_store(tmp_path)
        report = tmp_path / "eval.txt"
        code = main(["evaluate", "--store", str(store), "--task", "presence",
                     "--mode", "holdout", "--fraction", "0.25", "--seed", "9",
                     "--out", str(report)])
        assert code == 0
        text = report.read_text()
        assert "SNOWEVAL 1 mode=holdout task=presence seed=9" in text
        assert "fraction=0.25" in text
        assert "accuracy=" in text
        assert f"written {report}" in capsys.readouterr().out


class TestGridSearch:
    def test_small_grid(self, tmp_path, capsys):
        store = pose_store(tmp_path, n_per_class=6, dim=6)
        code = main(["grid-search", "--store", str(store), "--task", "pose",
                     "--grid", "1,5", "--k", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "C=1 mean_accuracy=" in out
        assert "C=5 mean_accuracy=" in out
        assert "best_C=1" in out

    def test_range_grid(self, tmp_path, capsys):
        store = pose_store(tmp_path, n_per_class=6, dim=6)
        code = main(["grid-search", "--store", str(store), "--task", "pose",
                     "--grid", "2:3", "--k", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "C=2 mean_accuracy=" in out and "C=3 mean_accuracy=" in out

    def test_inverted_range_exits_2(self, tmp_path, capsys):
        store = pose_store(tmp_path, n_per_class=6, dim=6)
        assert main(["grid-search", "--store", str(store), "--task", "pose",
                     "--grid", "5:1", "--k", "2"]) == 2
        assert "bad grid range" in capsys.readouterr().err

    def test_junk_grid_exits_2(self, tmp_path, capsys):
        store = pose_store(tmp_path, n_per_class=6, dim=6)
        assert main(["grid-search", "--store", str(store), "--task", "pose",
                     "--grid", "abc", "--k", "2"]) == 2
        assert "bad grid value" in capsys.readouterr().err


def test_module_invocation_smoke(tmp_path):
    manifest = domain.DatasetManifest(
        "TINY", 1, (domain.ManifestRecord("a", "a.png", 0),))
    path = tmp_path / "m.txt"
    path.write_bytes(domain.serialize_manifest(manifest))
    proc = subprocess.run(
        [sys.executable, "-m", "snowsum", "validate-manifest", "--manifest", str(path)],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "SNOWMANIFEST 1 name=TINY records=1" in proc.stdout
