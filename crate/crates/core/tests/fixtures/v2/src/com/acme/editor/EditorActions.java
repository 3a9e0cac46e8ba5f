package com.acme.editor;

import com.acme.editor.io.FileStore;

public class EditorActions {
    private final Document document = new Document();
    private String path = "untitled.txt";

    public void open() {
        document.load(path);
    }

    public void save() {
        String text = document.serialize();
        FileStore.write(text);
    }

    public void export() {
        FileStore.write(path + ".bak");
    }
}
