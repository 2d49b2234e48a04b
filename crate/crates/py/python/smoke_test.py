"""Smoke test for the Python bindings.

Builds the mini fixture corpus into a temporary directory, then runs a
text query, a code query and a few graph calls.

    cd crates/py && maturin build --release && pip install ../../target/wheels/apitask_kg-*.whl
    python python/smoke_test.py
"""

import pathlib
import tempfile

import apitask_kg_py as kg

FIXTURE = pathlib.Path(__file__).resolve().parents[2] / "core" / "fixtures" / "mini" / "pipeline.toml"


def main() -> None:
    q = kg.ApiPacket("remove()", "java.util.List", 1)
    assert q.matches(kg.ApiPacket("remove()", "java.util.List", 1))
    assert not q.matches(kg.ApiPacket("remove()", "java.util.Set", 1))
    assert not kg.ApiPacket("remove()").matches(kg.ApiPacket("add()"))
    assert abs(kg.overlap_score({"a", "b", "c"}, {"b", "c", "d"}) - 2 / 3) < 1e-9

    with tempfile.TemporaryDirectory() as out:
        pipeline = kg.Pipeline(str(FIXTURE), out_dir=out)
        try:
            pipeline.run("fuse")
        except kg.ConfigError as e:
            assert "run build-api first" in str(e)
        else:
            raise AssertionError("fuse ran without its prerequisites")

        snapshot = pipeline.run_all()
        graph = kg.KnowledgeGraph.load(snapshot)
        stats = graph.stats()
        assert stats["api_entities"] == 54, stats
        assert stats["task_entities"] == 16, stats
        again = kg.KnowledgeGraph.from_snapshot(graph.to_snapshot())
        assert again.to_snapshot() == graph.to_snapshot()

        engine = kg.SearchEngine.open(snapshot, pathlib.Path(out) / "vectors.txt", str(FIXTURE))
        r = engine.search_text("how to insert an item in List with add()")
        assert r["best_task"]["task"]["id"] == "task:lists:insert-an-element-into-a-list", r["best_task"]
        assert any(k["entity"]["qualified_name"] == "java.util.List.add(int,E)" for k in r["api_knowledge"])

        r = engine.search_code('ResultSet rs = stmt.executeQuery("UPDATE t SET a = 1");\nStatement stmt = conn.createStatement();')
        labels = {(x["label"], x["src"]["display"]) for x in r["extended"]}
        assert ("FunctionReplace", "java.sql.Statement.executeUpdate(String)") in labels, labels

        try:
            engine.search_code("")
        except kg.SearchFailed as e:
            assert e.args[0] == "NoApiFound"
        else:
            raise AssertionError("empty code was accepted")

        fragment = engine.fragment("task:lists:work-with-a-java-list", radius=0)
        assert [n["id"] for n in fragment["nodes"]] == ["task:lists:work-with-a-java-list"]
        node = graph.node("task:lists:work-with-a-java-list")
        assert node["payload"]["family"] == "Task"
        assert graph.node("missing") is None

    print("smoke test passed")


if __name__ == "__main__":
    main()
