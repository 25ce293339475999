import hashlib
import json

import pytest
from fastapi.testclient import TestClient

from sdee.app.cli import main
from sdee.app.service import AppConfig, create_app
from sdee.embed import save_model
from sdee.fixtures import (
    COMPRESSION_DESCRIPTION,
    COMPRESSION_REPO,
    build_fixture_bundle,
    make_fixture_corpus,
    write_ingest_files,
)
from sdee.store import load, persist


@pytest.fixture(scope="module")
def bundle_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    corpus, model = build_fixture_bundle()
    store_path = out / "fixture.sqlite"
    model_path = out / "fixture.pvam"
    persist(corpus, store_path)
    save_model(model, model_path)
    query_path = out / "query.txt"
    query_path.write_text(COMPRESSION_DESCRIPTION, encoding="utf-8")
    return {"store": store_path, "model": model_path, "query": query_path, "corpus": corpus}


@pytest.fixture(scope="module")
def client(bundle_paths):
    config = AppConfig(
        store_path=str(bundle_paths["store"]), model_path=str(bundle_paths["model"])
    )
    app = create_app(config)
    with TestClient(app) as test_client:
        yield test_client


class TestCli:
    def test_ingest_metrics_pipeline(self, tmp_path, capsys):
        corpus = make_fixture_corpus(repos_per_topic=2)
        paths = write_ingest_files(corpus, tmp_path / "in")
        store = tmp_path / "store.sqlite"
        code = main(
            [
                "ingest",
                "--repos",
                str(paths["repos"]),
                "--logs",
                str(paths["logs"]),
                "--out",
                str(store),
            ]
        )
        assert code == 0
        loaded = load(store)
        assert loaded.comparable()[:4] == corpus.comparable()[:4]

        code = main(["metrics", "--store", str(store)])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[-len(loaded.efforts) - 1].startswith("owner,repo,dev_count")

    def test_train_calibrate_estimate_flow(self, tmp_path, capsys):
        corpus = make_fixture_corpus(repos_per_topic=2)
        store = tmp_path / "store.sqlite"
        persist(corpus, store)
        model_path = tmp_path / "model.pvam"

        assert main([
            "train", "--store", str(store), "--epochs", "5", "--vec-size", "12",
            "--model", str(model_path), "--seed", "7",
        ]) == 0
        assert model_path.exists()
        capsys.readouterr()

        assert main(["calibrate", "--store", str(store), "--model", str(model_path)]) == 0
        calib = json.loads(capsys.readouterr().out)
        assert calib["alpha_hat"] == 1.0

        desc = tmp_path / "query.txt"
        desc.write_text(COMPRESSION_DESCRIPTION, encoding="utf-8")
        assert main([
            "estimate", "--desc-file", str(desc), "--store", str(store),
            "--model", str(model_path), "--k", "1", "--json",
        ]) == 0
        result = json.loads(capsys.readouterr().out)
        assert (result["matches"][0]["owner"], result["matches"][0]["repo"]) == COMPRESSION_REPO
        assert result["matches"][0]["similarity"] == 1.0
        assert result["k_used"] == 1

    def test_estimate_without_store_fails_cleanly(self, tmp_path, capsys):
        desc = tmp_path / "d.txt"
        desc.write_text("anything", encoding="utf-8")
        code = main(
            ["estimate", "--desc-file", str(desc), "--store", str(tmp_path / "missing.sqlite")]
        )
        assert code == 1
        assert "store not found" in capsys.readouterr().err

    def test_evaluate_writes_reports(self, bundle_paths, tmp_path, capsys):
        out_csv = tmp_path / "report.csv"
        raw = tmp_path / "raw.jsonl"
        code = main(
            [
                "evaluate", "--protocol", "kfold", "--k", "3",
                "--store", str(bundle_paths["store"]),
                "--out", str(out_csv), "--raw-out", str(raw),
            ]
        )
        assert code == 0
        assert out_csv.read_text().startswith("estimator,")
        assert len(raw.read_text().splitlines()) == 3 * 5
        assert "DevSDEE" in capsys.readouterr().out

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["estimate", "--nonsense"])
        assert excinfo.value.code == 2


class TestService:
    def test_healthz(self, client, bundle_paths):
        response = client.get("/healthz")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["store_records"] == len(bundle_paths["corpus"].vectors)
        assert body["model_id"].startswith("pvdbow-")

    def test_categories_lists_11_groups(self, client):
        body = client.get("/api/v1/categories").json()
        assert len(body["abstract"]) == 11
        assert "Software library" in body["abstract"]
        assert set(body["by_group"]) == set(body["abstract"])
        ids = [c["id"] for c in body["by_group"]["Software library"]]
        assert "compression-libraries" in ids

    def test_estimate_self_description_top_match(self, client, bundle_paths):
        response = client.post(
            "/api/v1/estimate",
            json={"title": "", "description": COMPRESSION_DESCRIPTION, "k": 1},
        )
        assert response.status_code == 200
        body = response.json()
        top = body["matches"][0]
        assert (top["owner"], top["repo"]) == COMPRESSION_REPO
        assert top["similarity"] == 1.0
        assert body["k_used"] == 1
        expected = bundle_paths["corpus"].effort_by_key()[COMPRESSION_REPO].effort_pm
        assert body["effort_person_months"] == pytest.approx(expected, rel=1e-9)

    def test_empty_description_422_with_field(self, client):
        response = client.post("/api/v1/estimate", json={"description": ""})
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert any("description" in str(item.get("loc")) for item in detail)

    def test_unknown_category_422(self, client):
        response = client.post(
            "/api/v1/estimate",
            json={"description": "compression library", "category": "Bogus"},
        )
        assert response.status_code == 422

    def test_below_threshold_404_with_best_candidate(self, client):
        response = client.post(
            "/api/v1/estimate",
            json={"description": "game engine rendering physics sprite", "k": 2},
        )
        assert response.status_code == 404
        body = response.json()
        assert body["best_below_threshold"] is not None
        assert body["best_below_threshold"]["similarity"] < 1.0

    def test_oov_description_422(self, client):
        response = client.post(
            "/api/v1/estimate", json={"description": "zzzz qqqq wwww mmmm"}
        )
        assert response.status_code == 422

    def test_identical_requests_byte_identical(self, client):
        payload = {"title": "x", "description": COMPRESSION_DESCRIPTION, "k": 2}
        first = client.post("/api/v1/estimate", json=payload)
        second = client.post("/api/v1/estimate", json=payload)
        assert first.content == second.content

    def test_store_bytes_unchanged_by_estimates(self, client, bundle_paths):
        before = hashlib.sha256(bundle_paths["store"].read_bytes()).hexdigest()
        for _ in range(3):
            client.post(
                "/api/v1/estimate",
                json={"description": COMPRESSION_DESCRIPTION, "k": 1},
            )
        after = hashlib.sha256(bundle_paths["store"].read_bytes()).hexdigest()
        assert before == after
